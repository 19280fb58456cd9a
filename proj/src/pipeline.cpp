#include "aiq/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "aiq/idempotent.hpp"

namespace aiq {

namespace {

// floors added to c·η in the asserted bounds
constexpr double kDistanceFloor = 1e-8;
constexpr double kDefectFloor = 1e-7;
constexpr double kResidualFloor = 1e-6;
constexpr double kUcpTol = 1e-8;

struct Context {
  Channel phi;
  double eta = 0.0;
  Channel phi_tilde;
  EpsilonAlgebra a;
  Reconstruction rec;
};

std::string strip_kind(const Error& e) {
  std::string w = e.what();
  auto pos = w.find(": ");
  return pos == std::string::npos ? w : w.substr(pos + 2);
}

template <class F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(stage) + " stage: " + strip_kind(e));
  }
}

json bound(const std::string& name, double value, double limit) {
  return {{"name", name}, {"value", value}, {"limit", limit}, {"ok", value <= limit}};
}

double ucp_defect(const ValidityFlags& f) { return std::max(f.unital_residual, std::max(0.0, -f.choi_min_eig)); }

Channel heisenberg(const Channel& ch) { return ch.picture == Picture::heisenberg ? ch : dual(ch); }

NormCertificate eta_certificate(const Channel& phi) {
  return cb_norm(hermitian_preserving_part(compose(phi, phi) - phi));
}

NormCertificate tilde_distance(const Channel& phi, const Channel& phi_tilde) {
  return cb_norm(hermitian_preserving_part(phi_tilde - phi));
}

json defects_to_json(const DefectReport& d) {
  json ext = json::array();
  for (const auto& e : d.extensions)
    ext.push_back({{"n", e.n}, {"eps_submult", e.eps_submult}, {"eps_assoc", e.eps_assoc}, {"eps_cstar", e.eps_cstar}});
  return {{"eps_submult", d.eps_submult}, {"eps_assoc", d.eps_assoc},     {"eps_cstar", d.eps_cstar},
          {"eps_unit", d.eps_unit},       {"sample_count", d.sample_count}, {"method", method_name(d.method)},
          {"extensions", ext},            {"max", d.max_eps()}};
}

ReconstructOptions reconstruct_options(const PipelineOptions& o) {
  ReconstructOptions r;
  r.seed = o.seed;
  return r;
}

FactorizeOptions factorize_options(const PipelineOptions& o) {
  FactorizeOptions f;
  f.twirl_cap = o.twirl_cap;
  f.seed = o.seed;
  f.tol = o.tol;
  return f;
}

bool close(double recorded, double recomputed, double abs_tol, double rel_tol) {
  return std::abs(recorded - recomputed) <= abs_tol + rel_tol * std::max(std::abs(recorded), std::abs(recomputed));
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::analyze: return "analyze";
    case Stage::idempotentize: return "idempotentize";
    case Stage::reconstruct: return "reconstruct";
    case Stage::factorize: return "factorize";
  }
  return "unknown";
}

json options_to_json(const PipelineOptions& o) {
  return {{"tol", o.tol.eq_tol},
          {"rank_tol", o.tol.rank_rel_tol},
          {"seed", o.seed},
          {"samples", o.samples},
          {"extension_n", o.extension_n},
          {"twirl_cap", o.twirl_cap},
          {"bound_constant", o.bound_constant}};
}

PipelineOptions options_from_json(const json& j) {
  PipelineOptions o;
  try {
    o.tol.eq_tol = j.at("tol").get<double>();
    o.tol.rank_rel_tol = j.at("rank_tol").get<double>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.samples = j.at("samples").get<int>();
    o.extension_n = j.at("extension_n").get<int>();
    o.twirl_cap = j.at("twirl_cap").get<std::size_t>();
    o.bound_constant = j.at("bound_constant").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("options: ") + e.what());
  }
  return o;
}

PipelineResult run_pipeline(const json& channel_doc, Stage stage, const PipelineOptions& opt) {
  using clock = std::chrono::steady_clock;
  PipelineResult out;
  json& rep = out.report;
  json timings = json::object();
  json bounds = json::array();
  rep["format"] = kReportFormat;
  rep["tool_version"] = kToolVersion;
  rep["stage"] = stage_name(stage);
  rep["options"] = options_to_json(opt);
  rep["input"] = {{"digest", digest(channel_doc)}, {"channel", channel_doc}};

  Context cx;
  const double c = opt.bound_constant;
  auto t0 = clock::now();
  auto lap = [&](const char* name) {
    auto t1 = clock::now();
    timings[name] = std::chrono::duration<double>(t1 - t0).count();
    t0 = t1;
  };

  staged("analyze", [&] {
    Channel raw = channel_from_json(channel_doc);
    if (raw.dim_in != raw.dim_out) throw Error(ErrorKind::DimMismatch, "the map must act on one space");
    cx.phi = heisenberg(raw);
    ValidityFlags flags = validate(cx.phi, kUcpTol);
    if (!flags.cp || !flags.unital)
      throw Error(ErrorKind::NotUCP, "choi min eigenvalue " + fmt(flags.choi_min_eig) + ", unital residual " +
                                         fmt(flags.unital_residual));
    NormCertificate eta = eta_certificate(cx.phi);
    cx.eta = eta.upper;
    json warnings = json::array();
    if (eta.value >= 0.25) warnings.push_back("eta >= 1/4: theta(2 Phi - 1) is outside its domain");
    rep["analysis"] = {{"dim", cx.phi.dim_in},
                       {"picture_in", raw.picture == Picture::heisenberg ? "heisenberg" : "schrodinger"},
                       {"flags", to_json(flags)},
                       {"eta", to_json(eta)},
                       {"carrier_dim", static_cast<int>(carrier(cx.phi, opt.tol).cols())},
                       {"warnings", warnings}};
    bounds.push_back(bound("input_ucp", ucp_defect(flags), kUcpTol));
    return 0;
  });
  lap("analyze");

  if (stage != Stage::analyze) {
    staged("idempotentize", [&] {
      Idempotentized idem = idempotentize(cx.phi, cx.eta, opt.tol);
      cx.phi_tilde = idem.phi;
      NormCertificate dist = tilde_distance(cx.phi, cx.phi_tilde);
      rep["idempotent"] = {{"residual", idem.residual}, {"distance", to_json(dist)}};
      bounds.push_back(bound("idempotent_residual", idem.residual, kDistanceFloor));
      bounds.push_back(bound("idempotent_distance", dist.upper, c * cx.eta + kDistanceFloor));
      out.phi_tilde = cx.phi_tilde;
      return 0;
    });
    lap("idempotentize");
  }

  if (stage == Stage::reconstruct || stage == Stage::factorize) {
    staged("algebra", [&] {
      cx.a = extract_algebra(cx.phi_tilde);
      DefectReport d = measure_defects(cx.a, opt.samples, opt.extension_n, opt.seed);
      rep["algebra"] = {{"dim", cx.a.dim()}, {"defects", defects_to_json(d)}};
      bounds.push_back(bound("algebra_defects", d.max_eps(), c * cx.eta + kDefectFloor));
      return 0;
    });
    lap("algebra");
    staged("reconstruct", [&] {
      ReconstructOptions ro = reconstruct_options(opt);
      cx.rec = reconstruct(cx.a, ro);
      const AlmostHom& v = cx.rec.v;
      json classes = json::array();
      for (const auto& cl : cx.rec.report.classes) classes.push_back(cl);
      rep["reconstruction"] = {{"spec", to_json(cx.rec.spec)},
                               {"samples", ro.samples},
                               {"unit_defect", v.unit_defect},
                               {"mult_defect", v.mult_defect},
                               {"iso_lower", v.iso_lower},
                               {"iso_upper", v.iso_upper},
                               {"coeffs", to_json(v.coeffs)},
                               {"projection_deltas", cx.rec.report.projection_deltas},
                               {"classes", classes},
                               {"stage_defects", cx.rec.report.stage_defects},
                               {"final_rounds", cx.rec.report.final_rounds}};
      bounds.push_back(bound("hom_unit_defect", v.unit_defect, c * cx.eta + kDefectFloor));
      bounds.push_back(bound("hom_mult_defect", v.mult_defect, c * cx.eta + kDefectFloor));
      return 0;
    });
    lap("reconstruct");
  }

  if (stage == Stage::factorize) {
    staged("factorize", [&] {
      Factorization f = factorize(cx.phi, cx.phi_tilde, cx.a, cx.rec.v, factorize_options(opt));
      const auto& cert = f.cert;
      json tw = {{"terms", f.twirl.terms},
                 {"matrix_unit_diagonal", f.twirl.standard_diagonal},
                 {"choi_min_eig", f.twirl.choi_min_eig},
                 {"unit_min_eig", f.twirl.unit_min_eig},
                 {"unit_deviation", f.twirl.unit_deviation}};
      json up = {{"env_dims", f.upsilon.env_dims},
                 {"rj_residual", f.upsilon.rj_residual},
                 {"cj_norm", f.upsilon.cj_norm},
                 {"xi_gain", f.upsilon.xi_gain},
                 {"unit_min_eig", f.upsilon.unit_min_eig}};
      rep["factorization"] = {{"spec", to_json(cert.spec)},
                              {"delta", channel_to_json(cert.delta_ch)},
                              {"upsilon", channel_to_json(cert.upsilon_ch)},
                              {"residual_factor", to_json(cert.residual_factor)},
                              {"residual_retract", to_json(cert.residual_retract)},
                              {"delta_shift", to_json(f.delta_shift)},
                              {"delta_flags", to_json(cert.delta_flags)},
                              {"upsilon_flags", to_json(cert.upsilon_flags)},
                              {"product_residual", cert.product_residual},
                              {"raw_factor_identity", f.raw.factor_identity},
                              {"raw_retract_identity", f.raw.retract_identity},
                              {"raw_unit_defect", f.raw.unit_defect},
                              {"twirl", tw},
                              {"upsilon_blocks", up}};
      bounds.push_back(bound("delta_ucp", ucp_defect(cert.delta_flags), kUcpTol));
      bounds.push_back(bound("upsilon_ucp", ucp_defect(cert.upsilon_flags), kUcpTol));
      bounds.push_back(bound("residual_factor", cert.residual_factor.upper, c * cx.eta + kResidualFloor));
      bounds.push_back(bound("residual_retract", cert.residual_retract.upper, c * cx.eta + kResidualFloor));
      return 0;
    });
    lap("factorize");
  }

  rep["bounds"] = bounds;
  for (const auto& b : bounds) out.bounds_hold = out.bounds_hold && b["ok"].get<bool>();
  rep["bounds_hold"] = out.bounds_hold;
  if (opt.timings) rep["timings"] = timings;
  return out;
}

std::vector<VerifyCheck> verify_report(const json& report) {
  std::vector<VerifyCheck> checks;
  auto add = [&](const std::string& name, bool ok, const std::string& detail = "") {
    checks.push_back({name, ok, detail});
  };
  try {
    add("format", report.value("format", "") == kReportFormat);
    add("tool_version", report.value("tool_version", "") == kToolVersion, report.value("tool_version", "?"));
    const json& input = report.at("input");
    const json& doc = input.at("channel");
    add("input_digest", digest(doc) == input.at("digest").get<std::string>());
    PipelineOptions opt = options_from_json(report.at("options"));
    const double c = opt.bound_constant;

    // analysis
    Channel phi = heisenberg(channel_from_json(doc));
    ValidityFlags flags = validate(phi, kUcpTol);
    add("input_ucp", flags.cp && flags.unital);
    NormCertificate eta = eta_certificate(phi);
    const json& an = report.at("analysis");
    double eta_rec = an.at("eta").at("value").get<double>();
    add("eta", close(eta_rec, eta.value, 1e-7, 1e-6), "recorded " + fmt(eta_rec) + ", recomputed " + fmt(eta.value));
    const double eta_up = eta.upper;

    std::optional<Channel> phi_tilde;
    if (report.contains("idempotent")) {
      Idempotentized idem = idempotentize(phi, eta_up, opt.tol);
      phi_tilde = idem.phi;
      double dist = tilde_distance(phi, idem.phi).upper;
      double rec = report["idempotent"].at("distance").at("upper").get<double>();
      add("idempotent_distance", close(rec, dist, 1e-7, 1e-6) && dist <= c * eta_up + kDistanceFloor,
          "recorded " + fmt(rec) + ", recomputed " + fmt(dist));
      add("idempotent_residual", idem.residual <= kDistanceFloor, fmt(idem.residual));
    }

    std::optional<EpsilonAlgebra> alg;
    if (report.contains("algebra") && phi_tilde) {
      alg = extract_algebra(*phi_tilde);
      DefectReport d = measure_defects(*alg, opt.samples, opt.extension_n, opt.seed);
      const json& ja = report["algebra"];
      double rec = ja.at("defects").at("max").get<double>();
      add("algebra_dim", ja.at("dim").get<int>() == alg->dim());
      add("algebra_defects", close(rec, d.max_eps(), 1e-10, 1e-6) && d.max_eps() <= c * eta_up + kDefectFloor,
          "recorded " + fmt(rec) + ", recomputed " + fmt(d.max_eps()));
    }

    if (report.contains("reconstruction") && alg) {
      const json& jr = report["reconstruction"];
      AlmostHom v;
      v.spec = spec_from_json(jr.at("spec"));
      v.coeffs = mat_from_json(jr.at("coeffs"));
      bool shape = v.coeffs.rows() == alg->dim() && v.coeffs.cols() == v.spec.dim();
      add("hom_shape", shape);
      if (shape) {
        measure_hom(v, *alg, jr.at("samples").get<int>(), opt.seed);
        double ru = jr.at("unit_defect").get<double>(), rm = jr.at("mult_defect").get<double>();
        add("hom_unit_defect", close(ru, v.unit_defect, 1e-12, 1e-6) && v.unit_defect <= c * eta_up + kDefectFloor,
            "recorded " + fmt(ru) + ", recomputed " + fmt(v.unit_defect));
        add("hom_mult_defect", close(rm, v.mult_defect, 1e-12, 1e-6) && v.mult_defect <= c * eta_up + kDefectFloor,
            "recorded " + fmt(rm) + ", recomputed " + fmt(v.mult_defect));
      }
      Reconstruction again = reconstruct(*alg, reconstruct_options(opt));
      add("spec_replay", again.spec == v.spec, again.spec.to_string());
    }

    if (report.contains("factorization")) {
      const json& jf = report["factorization"];
      BlockSpec spec = spec_from_json(jf.at("spec"));
      Channel delta = channel_from_json(jf.at("delta"));
      Channel upsilon = channel_from_json(jf.at("upsilon"));
      const int n = phi.dim_in, dim = spec.concrete_dim();
      bool shape = delta.dim_in == dim && delta.dim_out == n && upsilon.dim_in == n && upsilon.dim_out == dim;
      add("factor_shapes", shape);
      if (shape) {
        ValidityFlags fd = validate(delta, kUcpTol), fu = validate(upsilon, kUcpTol);
        add("delta_ucp", fd.cp && fd.unital, fmt(ucp_defect(fd)));
        add("upsilon_ucp", fu.cp && fu.unital, fmt(ucp_defect(fu)));
        auto check_residual = [&](const char* name, const Channel& diff) {
          NormCertificate r = cb_norm(hermitian_preserving_part(diff));
          double rec = jf.at(name).at("upper").get<double>();
          add(name, close(rec, r.upper, 1e-7, 1e-5) && r.upper <= c * eta_up + kResidualFloor,
              "recorded " + fmt(rec) + ", recomputed " + fmt(r.upper));
        };
        check_residual("residual_factor", compose(delta, upsilon) - phi);
        check_residual("residual_retract", compose(upsilon, delta) - block_identity(spec));
      }
    }

    if (report.contains("bounds")) {
      bool all = true;
      for (const auto& b : report["bounds"]) all = all && b.at("ok").get<bool>();
      add("recorded_bounds", all && report.value("bounds_hold", false));
    }
  } catch (const Error& e) {
    add("replay", false, e.what());
  } catch (const json::exception& e) {
    add("parse", false, e.what());
  }
  return checks;
}

json generate_channel(const GenRequest& r) {
  json src = {{"generator", r.kind}};
  Channel ch;
  if (r.kind == "example") {
    if (!(r.eta > 0.0 && r.eta < 1.0)) throw Error(ErrorKind::BadSpec, "example needs 0 < eta < 1");
    ch = example_channel(r.eta);
    src["eta"] = r.eta;
  } else if (r.kind == "pinching") {
    auto sizes = parse_sizes(r.blocks);
    ch = pinching_channel(sizes);
    src["blocks"] = sizes;
  } else if (r.kind == "idempotent") {
    auto pairs = parse_pairs(r.blocks);
    int used = 0;
    for (auto [d, e] : pairs) used += d * e;
    if (r.dim < used) throw Error(ErrorKind::BadSpec, "dim is smaller than Σ d·e = " + std::to_string(used));
    ch = gen_random_idempotent(pairs, r.dim, r.seed);
    json ps = json::array();
    for (auto [d, e] : pairs) ps.push_back({d, e});
    src["blocks"] = ps;
    src["dim"] = r.dim;
    src["seed"] = r.seed;
  } else if (r.kind == "random-ucp") {
    if (r.dim <= 0 || r.rank <= 0) throw Error(ErrorKind::BadSpec, "random-ucp needs dim and rank");
    ch = gen_random_ucp(r.dim, r.rank, r.seed);
    src["dim"] = r.dim;
    src["rank"] = r.rank;
    src["seed"] = r.seed;
  } else if (r.kind == "identity" || r.kind == "depolarizing") {
    if (r.dim <= 0) throw Error(ErrorKind::BadSpec, r.kind + " needs dim");
    ch = r.kind == "identity" ? identity_channel(r.dim) : depolarizing_channel(r.dim);
    src["dim"] = r.dim;
  } else {
    throw Error(ErrorKind::BadSpec, "unknown generator " + r.kind);
  }
  return channel_to_json(ch, src);
}

json perturb_channel(const json& doc, double t, std::uint64_t seed) {
  Channel ch = channel_from_json(doc);
  if (t == 0.0) return doc;
  Channel p = gen_perturbed(heisenberg(ch), t, seed);
  json src = {{"generator", "perturb"}, {"t", t}, {"seed", seed}, {"base", doc.value("source", json::object())}};
  return channel_to_json(p, src);
}

std::vector<std::pair<std::string, json>> builtin_corpus() {
  std::vector<std::pair<std::string, json>> c;
  c.emplace_back("example-0.04", generate_channel({"example", 0.04, "", 0, 0, 0}));
  c.emplace_back("pinching-3-2-1", generate_channel({"pinching", 0, "3,2,1", 0, 0, 0}));
  c.emplace_back("identity-3", generate_channel({"identity", 0, "", 3, 0, 0}));
  c.emplace_back("depolarizing-2", generate_channel({"depolarizing", 0, "", 2, 0, 0}));
  c.emplace_back("idempotent-7", generate_channel({"idempotent", 0, "(2,2),(1,3)", 7, 0, 1}));
  c.emplace_back("perturbed-pinching-2-1", perturb_channel(generate_channel({"pinching", 0, "2,1", 0, 0, 0}), 1e-2, 1));
  return c;
}

}  // namespace aiq
