#include "aiq/factorization.hpp"

#include <algorithm>
#include <cmath>

namespace aiq {

namespace {

struct TwirlTerm {
  double w;
  Mat a, b;  // Δ'(X) gets w·Φ(Δ̃(X a) Δ̃(b))
};

Mat embed_block(const BlockSpec& spec, int l, const Mat& x) {
  const int dim = spec.concrete_dim();
  int off = 0;
  for (int k = 0; k < l; ++k) off += spec.block_dims[k];
  Mat out = Mat::Zero(dim, dim);
  out.block(off, off, x.rows(), x.cols()) = x;
  return out;
}

Mat concrete_unit(int dim, int i, int j) {
  Mat e = Mat::Zero(dim, dim);
  e(i, j) = 1;
  return e;
}

// (i, j) pairs of C^{Σd} that lie inside one block
std::vector<std::pair<int, int>> block_entries(const BlockSpec& spec) {
  std::vector<std::pair<int, int>> out;
  int off = 0;
  for (int d : spec.block_dims) {
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) out.emplace_back(off + i, off + j);
    off += d;
  }
  return out;
}

std::vector<TwirlTerm> twirl_terms(const BlockSpec& spec, std::size_t cap, bool& standard) {
  double count = static_cast<double>(spec.block_dims.size());
  for (int d : spec.block_dims) count *= double(d) * d;
  std::vector<TwirlTerm> terms;
  standard = count > double(cap);
  if (!standard) {
    Diagonal dg = pauli_diagonal(spec, cap);
    for (size_t s = 0; s < dg.weights.size(); ++s) {
      Mat u = b_concrete(spec, dg.unitaries[s]);
      terms.push_back({dg.weights[s], u.adjoint(), u});
    }
    return terms;
  }
  const int dim = spec.concrete_dim();
  int off = 0;
  for (int d : spec.block_dims) {
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        terms.push_back({1.0 / d, concrete_unit(dim, off + j, off + k), concrete_unit(dim, off + k, off + j)});
    off += d;
  }
  return terms;
}

// Heisenberg map C^{din} -> C^{dout} from its values on the listed matrix units, zero elsewhere
Channel from_units(int din, int dout, const std::vector<std::pair<int, int>>& entries, const std::vector<Mat>& values) {
  Mat s = Mat::Zero(static_cast<Eigen::Index>(dout) * dout, static_cast<Eigen::Index>(din) * din);
  for (size_t u = 0; u < entries.size(); ++u) s.col(entries[u].first + entries[u].second * din) = vec(values[u]);
  return Channel(din, dout, s);
}

Mat conjugate_superop(const Mat& left, const Mat& right) {
  // vec(L Y R) = (Rᵀ ⊗ L) vec(Y)
  return kron(Mat(right.transpose()), left);
}

SqrtPair checked_inv_sqrt(const Mat& g, double& min_eig, const char* what) {
  auto sd = herm_eig(hermitian_part(g));
  min_eig = sd.values(sd.values.size() - 1);
  if (!(min_eig > 1e-8 * std::max(1.0, sd.values(0))))
    throw Error(ErrorKind::NormalizationSingular, std::string(what) + " is not positive definite");
  return matrix_sqrt_inv_sqrt(hermitian_part(g));
}

}  // namespace

Channel block_identity(const BlockSpec& spec) {
  const int dim = spec.concrete_dim();
  return from_function(dim, dim, [&spec](const Mat& x) { return b_concrete(spec, b_from_concrete(spec, x)); });
}

RawFactor raw_factor(const AlmostHom& v, const EpsilonAlgebra& a, const Channel& phi_tilde) {
  const BlockSpec& spec = v.spec;
  if (v.coeffs.rows() != v.coeffs.cols())
    throw Error(ErrorKind::NotBijective, "dim A = " + std::to_string(v.coeffs.rows()) + " but dim B = " +
                                             std::to_string(v.coeffs.cols()));
  RVec sv = singular_values(v.coeffs);
  if (sv.size() == 0 || !(sv(sv.size() - 1) > 1e-8 * sv(0)))
    throw Error(ErrorKind::NotBijective, "v is numerically singular");
  const Mat inv = v.coeffs.fullPivLu().inverse();
  const int dim = spec.concrete_dim(), n = a.ambient;

  RawFactor r;
  r.delta_tilde = from_function(dim, n, [&](const Mat& x) { return a.to_matrix(v.coeffs * b_from_concrete(spec, x)); });
  r.upsilon_tilde = from_function(n, dim, [&](const Mat& x) { return b_concrete(spec, inv * a.project(x)); });
  r.factor_identity = operator_norm(compose(r.delta_tilde, r.upsilon_tilde).superop - phi_tilde.superop);
  r.retract_identity = operator_norm(compose(r.upsilon_tilde, r.delta_tilde).superop - block_identity(spec).superop);
  r.unit_defect = operator_norm(r.delta_tilde.apply(identity(dim)) - identity(n));
  return r;
}

Channel twirl_to_cp(const Channel& delta_tilde, const Channel& phi, const BlockSpec& spec, std::size_t twirl_cap,
                    TwirlReport* report) {
  const int dim = spec.concrete_dim(), n = phi.dim_in;
  if (delta_tilde.dim_in != dim || delta_tilde.dim_out != n)
    throw Error(ErrorKind::DimMismatch, "twirl: Δ̃ does not map B to B(H)");
  bool standard = false;
  auto terms = twirl_terms(spec, twirl_cap, standard);
  std::vector<Mat> db(terms.size());
  for (size_t s = 0; s < terms.size(); ++s) db[s] = delta_tilde.apply(terms[s].b);

  auto entries = block_entries(spec);
  std::vector<Mat> values;
  for (auto [i, j] : entries) {
    Mat e = concrete_unit(dim, i, j);
    Mat acc = Mat::Zero(n, n);
    for (size_t s = 0; s < terms.size(); ++s) acc += terms[s].w * (delta_tilde.apply(e * terms[s].a) * db[s]);
    values.push_back(phi.apply(acc));
  }
  Channel raw = from_units(dim, n, entries, values);

  TwirlReport rep;
  rep.terms = terms.size();
  rep.standard_diagonal = standard;
  Mat j = hermitian_part(to_choi(raw));
  rep.choi_min_eig = herm_eig(j).values.minCoeff() / std::max(1e-300, operator_norm(j));
  Mat g = raw.apply(identity(dim));
  auto sp = checked_inv_sqrt(g, rep.unit_min_eig, "Δ'(I)");
  rep.unit_deviation = operator_norm(sp.inv_sqrt - identity(n));
  if (report) *report = rep;
  return Channel(dim, n, conjugate_superop(sp.inv_sqrt, sp.inv_sqrt) * raw.superop);
}

Channel build_upsilon(const Channel& delta, const Channel& phi, const BlockSpec& spec, const Tolerances& tol,
                      UpsilonReport* report) {
  const int dim = spec.concrete_dim(), n = phi.dim_in;
  const int m = static_cast<int>(spec.block_dims.size());
  Stinespring vs = to_stinespring(phi, tol);
  const int f = vs.env_dim;
  UpsilonReport rep;
  std::vector<std::vector<Mat>> slices(m);  // L_j restricted to environment index f, each n × d_j

  for (int l = 0; l < m; ++l) {
    const int d = spec.block_dims[l];
    Channel delta_l = from_function(d, n, [&](const Mat& x) { return delta.apply(embed_block(spec, l, x)); });
    Stinespring ws = to_stinespring(delta_l, tol);
    const int e = ws.env_dim;
    if (e == 0) throw Error(ErrorKind::NormalizationSingular, "Δ vanishes on block " + std::to_string(l));
    const Mat& w = ws.v;  // (d·e) × n
    Diagonal dg = pauli_diagonal(BlockSpec{{d}});
    std::vector<Mat> us;
    for (const auto& u : dg.unitaries) us.push_back(b_concrete(dg.spec, u));

    const Mat ie = identity(e);
    Mat wwd = w * w.adjoint();
    Mat r = Mat::Zero(d * e, d * e);
    for (size_t s = 0; s < us.size(); ++s) {
      Mat ue = kron(us[s], ie);
      r += dg.weights[s] * (ue.adjoint() * wwd * ue);
    }
    Mat c = ptrace_first(r, d, e) / double(d);
    const double rn = operator_norm(r);
    const double resid = rn > 0 ? operator_norm(r - kron(identity(d), c)) / rn : 0.0;
    if (resid > 1e-6)
      throw Error(ErrorKind::RjNotFactorizable, "R_" + std::to_string(l) + " is " + std::to_string(resid) +
                                                    " away from the form 1 ⊗ C");
    Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeFullV);
    Vec xi = svd.matrixV().col(0);
    rep.env_dims.push_back(e);
    rep.rj_residual.push_back(resid);
    rep.cj_norm.push_back(svd.singularValues()(0));
    rep.xi_gain.push_back((c * xi).norm());

    Mat xi_m = xi;
    Mat vw = vs.v * w.adjoint();  // (n·f) × (d·e)
    const Mat iff = identity(f);
    Mat lj = Mat::Zero(static_cast<Eigen::Index>(n) * f, d);
    for (size_t s = 0; s < us.size(); ++s) {
      Mat du = delta.apply(embed_block(spec, l, us[s].adjoint()));
      lj += dg.weights[s] * (kron(du, iff) * vw * kron(us[s], xi_m));
    }
    for (int k = 0; k < f; ++k) {
      Mat sl(n, d);
      for (int i = 0; i < n; ++i) sl.row(i) = lj.row(static_cast<Eigen::Index>(i) * f + k);
      slices[l].push_back(sl);
    }
  }

  auto upsilon_raw = [&](const Mat& x) {
    Mat px = phi.apply(x);
    std::vector<Mat> blocks(m);
    for (int l = 0; l < m; ++l) {
      const int d = spec.block_dims[l];
      blocks[l] = Mat::Zero(d, d);
      for (const auto& sl : slices[l]) blocks[l] += sl.adjoint() * px * sl;
    }
    return b_concrete(spec, b_from_blocks(spec, blocks));
  };
  Channel raw = from_function(n, dim, upsilon_raw);
  Mat g = raw.apply(identity(n));
  auto sp = checked_inv_sqrt(g, rep.unit_min_eig, "Υ'(1)");
  if (report) *report = rep;
  return Channel(n, dim, conjugate_superop(sp.inv_sqrt, sp.inv_sqrt) * raw.superop);
}

FactorizationCertificate certify(const Channel& delta, const Channel& upsilon, const Channel& phi,
                                 const BlockSpec& spec, int samples, std::uint64_t seed, const SdpOptions& sdp) {
  FactorizationCertificate c;
  c.spec = spec;
  c.delta_ch = delta;
  c.upsilon_ch = upsilon;
  Channel id_b = block_identity(spec);
  c.residual_factor = cb_norm(hermitian_preserving_part(compose(delta, upsilon) - phi), sdp);
  c.residual_retract = cb_norm(hermitian_preserving_part(compose(upsilon, delta) - id_b), sdp);
  c.delta_flags = validate(delta, 1e-8);
  c.upsilon_flags = validate(upsilon, 1e-8);

  Rng rng(seed);
  const int dim = spec.concrete_dim();
  for (int k : {1, 2}) {
    Channel dk = tensor_extend(delta, k), uk = tensor_extend(upsilon, k), pk = tensor_extend(id_b, k);
    double worst = 0.0;
    for (int t = 0; t < samples; ++t) {
      Mat x = pk.apply(random_gaussian(k * dim, k * dim, rng));
      Mat y = pk.apply(random_gaussian(k * dim, k * dim, rng));
      const double scale = operator_norm(x) * operator_norm(y);
      if (scale == 0) continue;
      Mat dxdy = dk.apply(x) * dk.apply(y);
      worst = std::max(worst, operator_norm(uk.apply(dxdy) - x * y) / scale);
    }
    c.product_residual.push_back(worst);
  }
  return c;
}

Factorization factorize(const Channel& phi, const Channel& phi_tilde, const EpsilonAlgebra& a, const AlmostHom& v,
                        const FactorizeOptions& opt) {
  Factorization out;
  out.raw = raw_factor(v, a, phi_tilde);
  Channel delta = twirl_to_cp(out.raw.delta_tilde, phi, v.spec, opt.twirl_cap, &out.twirl);
  out.delta_shift = cb_norm(hermitian_preserving_part(delta - out.raw.delta_tilde), opt.sdp);
  Channel upsilon = build_upsilon(delta, phi, v.spec, opt.tol, &out.upsilon);
  out.cert = certify(delta, upsilon, phi, v.spec, opt.samples, opt.seed, opt.sdp);
  return out;
}

}  // namespace aiq
