// almostidem: generate channels, measure idempotency, reconstruct the invariant algebra, factorize.
//
// Exit codes: 0 all asserted bounds hold, 1 a bound or verification check failed,
// 2 usage or parse error, 3 module error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "aiq/pipeline.hpp"

using namespace aiq;

namespace {

struct Common {
  double tol = 1e-9;
  double rank_tol = 1e-6;
  std::uint64_t seed = 1;
  int samples = 200;
  int extension_n = 1;
  std::size_t twirl_cap = 10000;
  std::string json_out;
  bool timings = false;

  PipelineOptions options() const {
    PipelineOptions o;
    o.tol.eq_tol = tol;
    o.tol.rank_rel_tol = rank_tol;
    o.seed = seed;
    o.samples = samples;
    o.extension_n = extension_n;
    o.twirl_cap = twirl_cap;
    o.timings = timings;
    return o;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--tol", c.tol, "equality tolerance for Newton iterations")->capture_default_str();
  app->add_option("--rank-tol", c.rank_tol, "relative rank cutoff")->capture_default_str();
  app->add_option("--seed", c.seed, "seed for every sampled quantity")->capture_default_str();
  app->add_option("--samples", c.samples, "probes for the algebra defects")->capture_default_str();
  app->add_option("--extension-n", c.extension_n, "largest n for M_n tensor extensions")->capture_default_str();
  app->add_option("--twirl-cap", c.twirl_cap, "largest Pauli diagonal to enumerate")->capture_default_str();
  app->add_option("--json-out", c.json_out, "write the full report here ('-' for stdout)");
  app->add_flag("--timings", c.timings, "record wall-clock time per stage");
}

void emit(const std::string& path, const json& j) {
  if (path.empty()) return;
  if (path == "-")
    std::cout << j.dump(2) << "\n";
  else
    write_json_atomic(path, j);
}

void print_bounds(const json& rep) {
  for (const auto& b : rep["bounds"])
    std::printf("  %-4s %-22s %.3e <= %.3e\n", b["ok"].get<bool>() ? "ok" : "FAIL", b["name"].get<std::string>().c_str(),
                b["value"].get<double>(), b["limit"].get<double>());
}

void print_summary(const json& rep) {
  const json& an = rep["analysis"];
  const json& f = an["flags"];
  std::printf("dim %d  carrier %d  cp %s  unital %s\n", an["dim"].get<int>(), an["carrier_dim"].get<int>(),
              f["cp"].get<bool>() ? "yes" : "no", f["unital"].get<bool>() ? "yes" : "no");
  const json& eta = an["eta"];
  std::printf("eta = ||Phi^2 - Phi||_cb = %.10f  in [%.10f, %.10f]\n", eta["value"].get<double>(),
              eta["lower"].get<double>(), eta["upper"].get<double>());
  for (const auto& w : an["warnings"]) std::printf("warning: %s\n", w.get<std::string>().c_str());
  if (rep.contains("idempotent"))
    std::printf("||Phi~ - Phi||_cb <= %.3e  (idempotency residual %.1e)\n",
                rep["idempotent"]["distance"]["upper"].get<double>(), rep["idempotent"]["residual"].get<double>());
  if (rep.contains("algebra"))
    std::printf("algebra dim %d  max defect %.3e\n", rep["algebra"]["dim"].get<int>(),
                rep["algebra"]["defects"]["max"].get<double>());
  if (rep.contains("reconstruction")) {
    const json& r = rep["reconstruction"];
    std::printf("spec %s  unit defect %.3e  mult defect %.3e\n", BlockSpec{r["spec"].get<std::vector<int>>()}.to_string().c_str(),
                r["unit_defect"].get<double>(), r["mult_defect"].get<double>());
  }
  if (rep.contains("factorization")) {
    const json& f2 = rep["factorization"];
    std::printf("||Delta Upsilon - Phi||_cb <= %.3e   ||Upsilon Delta - 1||_cb <= %.3e\n",
                f2["residual_factor"]["upper"].get<double>(), f2["residual_retract"]["upper"].get<double>());
  }
  if (rep.contains("timings"))
    for (const auto& [k, v] : rep["timings"].items()) std::printf("time %-14s %.2fs\n", k.c_str(), v.get<double>());
  print_bounds(rep);
}

int run_stage(const std::string& in, Stage stage, const Common& c, const std::string& channel_out = "") {
  json doc = read_json(in);
  PipelineResult r = run_pipeline(doc, stage, c.options());
  print_summary(r.report);
  if (!channel_out.empty() && r.phi_tilde) {
    json src = {{"generator", "idempotentize"}, {"input_digest", r.report["input"]["digest"]}};
    write_json_atomic(channel_out, channel_to_json(*r.phi_tilde, src));
  }
  emit(c.json_out, r.report);
  return r.bounds_hold ? 0 : 1;
}

int verify_file(const std::string& path, bool quiet = false) {
  auto checks = verify_report(read_json(path));
  bool all = true;
  for (const auto& ch : checks) {
    all = all && ch.ok;
    if (!quiet || !ch.ok)
      std::printf("  %-4s %-22s %s\n", ch.ok ? "ok" : "FAIL", ch.name.c_str(), ch.detail.c_str());
  }
  std::printf("%s\n", all ? "verified" : "verification FAILED");
  return all ? 0 : 1;
}

int demo(const std::string& dir_arg, const Common& c) {
  namespace fs = std::filesystem;
  fs::path dir = dir_arg.empty() ? fs::temp_directory_path() / "almostidem-demo" : fs::path(dir_arg);
  fs::create_directories(dir);
  int status = 0;
  for (const auto& [name, doc] : builtin_corpus()) {
    std::printf("== %s\n", name.c_str());
    const std::string chan = (dir / (name + ".json")).string();
    const std::string rep = (dir / (name + ".report.json")).string();
    write_json_atomic(chan, doc);
    json loaded = read_json(chan);
    PipelineResult r = run_pipeline(loaded, Stage::factorize, c.options());
    print_summary(r.report);
    write_json_atomic(rep, r.report);
    int v = verify_file(rep, true);
    if (!r.bounds_hold || v != 0) status = 1;
  }
  std::printf("artifacts in %s\n", dir.string().c_str());
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"almostidem: structure of approximately idempotent UCP maps"};
  app.require_subcommand(1);

  if (const char* env = std::getenv("ALMOSTIDEM_THREADS")) {
    char* end = nullptr;
    long t = std::strtol(env, &end, 10);
    if (*env == '\0' || *end != '\0' || t <= 0) {
      std::fprintf(stderr, "ALMOSTIDEM_THREADS must be a positive integer\n");
      return 2;
    }
  }

  // gen
  auto* gen = app.add_subcommand("gen", "write a channel file");
  GenRequest req;
  bool example = false;
  std::string pinching, idem, perturb_in;
  int random_dim = 0, identity_dim = 0, depol_dim = 0;
  double t = 0.0;
  std::string gen_out;
  auto* ex = gen->add_flag("--example", example, "the two-outcome qubit example with parameter --eta");
  gen->add_option("--eta", req.eta, "parameter of the qubit example")->needs(ex);
  auto* pin = gen->add_option("--pinching", pinching, "block sizes, e.g. 3,2,1");
  auto* idm = gen->add_option("--idempotent", idem, "random exact idempotent with blocks (d,e), e.g. (2,2),(1,3)");
  auto* rnd = gen->add_option("--random-ucp", random_dim, "random UCP map on C^dim");
  gen->add_option("--rank", req.rank, "Kraus rank for --random-ucp")->needs(rnd);
  auto* idn = gen->add_option("--identity", identity_dim, "identity map on C^dim");
  auto* dep = gen->add_option("--depolarizing", depol_dim, "completely depolarizing map on C^dim");
  auto* per = gen->add_option("--perturb", perturb_in, "perturb an existing channel file")->check(CLI::ExistingFile);
  gen->add_option("--t", t, "perturbation weight in [0,1]")->needs(per);
  gen->add_option("--dim", req.dim, "ambient dimension for --idempotent")->needs(idm);
  gen->add_option("--seed", req.seed, "generator seed")->required();
  gen->add_option("-o,--out", gen_out, "output path (stdout if omitted)");
  for (auto* a : {pin, idm, rnd, idn, dep, per})
    for (auto* b : {pin, idm, rnd, idn, dep, per})
      if (a != b) a->excludes(b);
  for (auto* b : {pin, idm, rnd, idn, dep, per}) ex->excludes(b);

  Common common;
  std::string in, channel_out, report_path, demo_dir;
  auto* an = app.add_subcommand("analyze", "validity flags, certified eta and carrier dimension");
  auto* id = app.add_subcommand("idempotentize", "write the idempotent map theta(2 Phi - 1)");
  auto* rc = app.add_subcommand("reconstruct", "block structure and almost isomorphism");
  auto* fz = app.add_subcommand("factorize", "UCP encode/decode pair with certified residuals");
  for (auto* s : {an, id, rc, fz}) {
    s->add_option("input", in, "channel file")->required()->check(CLI::ExistingFile);
    add_common(s, common);
  }
  id->add_option("-o,--out", channel_out, "output channel file")->required();
  auto* vf = app.add_subcommand("verify", "recompute every recorded claim of a report");
  vf->add_option("report", report_path, "report file")->required()->check(CLI::ExistingFile);
  auto* dm = app.add_subcommand("demo", "gen -> factorize -> verify on the built-in corpus");
  dm->add_option("--out-dir", demo_dir, "where to keep the artifacts");
  add_common(dm, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      json doc;
      if (example) {
        req.kind = "example";
        doc = generate_channel(req);
      } else if (!perturb_in.empty()) {
        if (t == 0.0) {
          // the untouched bytes, after checking they parse
          std::string text = read_file(perturb_in);
          channel_from_json(json::parse(text));
          if (gen_out.empty())
            std::cout << text;
          else
            write_file_atomic(gen_out, text);
          return 0;
        }
        doc = perturb_channel(read_json(perturb_in), t, req.seed);
      } else {
        if (!pinching.empty()) req.kind = "pinching", req.blocks = pinching;
        else if (!idem.empty()) req.kind = "idempotent", req.blocks = idem;
        else if (random_dim > 0) req.kind = "random-ucp", req.dim = random_dim;
        else if (identity_dim > 0) req.kind = "identity", req.dim = identity_dim;
        else if (depol_dim > 0) req.kind = "depolarizing", req.dim = depol_dim;
        else throw Error(ErrorKind::BadSpec, "choose a generator");
        doc = generate_channel(req);
      }
      if (gen_out.empty())
        std::cout << doc.dump(2) << "\n";
      else
        write_json_atomic(gen_out, doc);
      return 0;
    }
    if (an->parsed()) return run_stage(in, Stage::analyze, common);
    if (id->parsed()) return run_stage(in, Stage::idempotentize, common, channel_out);
    if (rc->parsed()) return run_stage(in, Stage::reconstruct, common);
    if (fz->parsed()) return run_stage(in, Stage::factorize, common);
    if (vf->parsed()) return verify_file(report_path);
    if (dm->parsed()) return demo(demo_dir, common);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::BadSpec ? 2 : 3;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: ParseError: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
