#include "aiq/starcalc.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace aiq {

double DefectReport::max_eps() const {
  double m = std::max({eps_submult, eps_assoc, eps_cstar, eps_unit});
  for (const auto& e : extensions) m = std::max({m, e.eps_submult, e.eps_assoc, e.eps_cstar});
  return m;
}

Vec EpsilonAlgebra::star(const Vec& x, const Vec& y) const { return tensor * kron(y, x); }

Mat EpsilonAlgebra::left(const Vec& x) const {
  const int n = dim();
  Mat out = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) out.col(j) = tensor.middleCols(static_cast<Eigen::Index>(j) * n, n) * x;
  return out;
}

Mat EpsilonAlgebra::right(const Vec& x) const {
  const int n = dim();
  Mat out = Mat::Zero(n, n);
  for (int j = 0; j < n; ++j) out += tensor.middleCols(static_cast<Eigen::Index>(j) * n, n) * x(j);
  return out;
}

Mat EpsilonAlgebra::to_matrix(const Vec& x) const { return unvec(bmat * x, ambient, ambient); }

double EpsilonAlgebra::norm(const Vec& x) const { return operator_norm(to_matrix(x)); }

Idempotentized idempotentize(const Channel& ch, std::optional<double> eta, const Tolerances& tol) {
  if (ch.dim_in != ch.dim_out) throw Error(ErrorKind::DimMismatch, "idempotentize needs a square map");
  if (eta && *eta >= 0.25) throw Error(ErrorKind::EtaTooLarge, "η = " + std::to_string(*eta) + " ≥ 1/4");
  const int d = ch.dim_in;
  const auto n2 = static_cast<Eigen::Index>(d) * d;
  Mat s;
  try {
    s = theta(2.0 * ch.superop - Mat::Identity(n2, n2), tol);
  } catch (const Error& e) {
    throw Error(ErrorKind::EtaTooLarge, std::string("sign iteration failed: ") + e.what());
  }
  Mat k = transpose_permutation(d);
  s = 0.5 * (s + k * s.conjugate() * k);
  Idempotentized out{Channel(d, d, s, ch.picture), operator_norm(s * s - s)};
  return out;
}

EpsilonAlgebra algebra_from_basis(const std::vector<Mat>& basis, const Mat& projector) {
  EpsilonAlgebra a;
  const int n = static_cast<int>(basis.size());
  if (n == 0) throw Error(ErrorKind::DimMismatch, "empty basis");
  a.ambient = static_cast<int>(basis[0].rows());
  a.basis = basis;
  a.bmat.resize(static_cast<Eigen::Index>(a.ambient) * a.ambient, n);
  for (int i = 0; i < n; ++i) a.bmat.col(i) = vec(basis[i]);
  a.projector = projector;
  a.unit = a.coords_of(Mat::Identity(a.ambient, a.ambient));
  a.tensor.resize(n, static_cast<Eigen::Index>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a.tensor.col(i + static_cast<Eigen::Index>(j) * n) = projector * vec(Mat(basis[i] * basis[j]));
  // (B_i ⋆ B_j)† = B_j ⋆ B_i for a Hermitian basis
  Mat sym = a.tensor;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      sym.col(i + static_cast<Eigen::Index>(j) * n) =
          0.5 * (a.tensor.col(i + static_cast<Eigen::Index>(j) * n) + a.tensor.col(j + static_cast<Eigen::Index>(i) * n).conjugate());
  a.tensor = sym;
  return a;
}

EpsilonAlgebra extract_algebra(const Channel& phi_tilde) {
  const int d = phi_tilde.dim_in;
  const Mat& s = phi_tilde.superop;
  RVec sv = singular_values(s);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-6 && sv(i) < 0.9)
      throw Error(ErrorKind::IllConditionedSpectralGap, "singular value " + std::to_string(sv(i)) + " of the idempotent");
  Mat q = column_space_abs(s, 0.5);
  std::vector<Mat> ms;
  for (Eigen::Index k = 0; k < q.cols(); ++k) ms.push_back(unvec(q.col(k), d, d));
  std::vector<Mat> basis = hermitian_span_basis(ms, d);
  if (static_cast<Eigen::Index>(basis.size()) != q.cols())
    throw Error(ErrorKind::IllConditionedSpectralGap, "image is not closed under the adjoint");
  Mat bmat(static_cast<Eigen::Index>(d) * d, basis.size());
  for (size_t i = 0; i < basis.size(); ++i) bmat.col(i) = vec(basis[i]);
  EpsilonAlgebra a = algebra_from_basis(basis, bmat.adjoint() * s);
  return a;
}

EpsilonAlgebra full_matrix_algebra(int n) {
  std::vector<Mat> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (int p = 0; p < n; ++p) {
    Mat e = Mat::Zero(n, n);
    e(p, p) = 1;
    basis.push_back(e);
  }
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) {
      Mat x = Mat::Zero(n, n), y = Mat::Zero(n, n);
      x(p, q) = x(q, p) = r;
      y(p, q) = cplx(0, r);
      y(q, p) = cplx(0, -r);
      basis.push_back(x);
      basis.push_back(y);
    }
  Mat bmat(static_cast<Eigen::Index>(n) * n, basis.size());
  for (size_t i = 0; i < basis.size(); ++i) bmat.col(i) = vec(basis[i]);
  return algebra_from_basis(basis, bmat.adjoint());
}

namespace {

Vec random_coords(int n, Rng& rng) { return random_gaussian(n, 1, rng).col(0); }

struct Probe {
  double submult = 0, assoc = 0, cstar = 0;
};

// elements of M_n ⊗ A as n×n arrays of coordinate vectors
using Ext = std::vector<Vec>;

Ext ext_star(const EpsilonAlgebra& a, const Ext& x, const Ext& y, int n) {
  Ext out(n * n, Vec::Zero(a.dim()));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      for (int k = 0; k < n; ++k) out[r * n + c] += a.star(x[r * n + k], y[k * n + c]);
  return out;
}

Ext ext_adjoint(const Ext& x, int n) {
  Ext out(n * n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out[r * n + c] = x[c * n + r].conjugate();
  return out;
}

double ext_norm(const EpsilonAlgebra& a, const Ext& x, int n) {
  const int d = a.ambient;
  Mat m(n * d, n * d);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m.block(r * d, c * d, d, d) = a.to_matrix(x[r * n + c]);
  return operator_norm(m);
}

Ext ext_sub(const Ext& x, const Ext& y) {
  Ext out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return out;
}

Probe probe(const EpsilonAlgebra& a, const Ext& x, const Ext& y, const Ext& z, int n) {
  Probe p;
  double nx = ext_norm(a, x, n), ny = ext_norm(a, y, n), nz = ext_norm(a, z, n);
  if (nx == 0 || ny == 0 || nz == 0) return p;
  Ext xy = ext_star(a, x, y, n);
  p.submult = std::max(0.0, ext_norm(a, xy, n) / (nx * ny) - 1.0);
  Ext lhs = ext_star(a, xy, z, n), rhs = ext_star(a, x, ext_star(a, y, z, n), n);
  p.assoc = ext_norm(a, ext_sub(lhs, rhs), n) / (nx * ny * nz);
  p.cstar = std::max(0.0, 1.0 - ext_norm(a, ext_star(a, ext_adjoint(x, n), x, n), n) / (nx * nx));
  return p;
}

Ext random_ext(const EpsilonAlgebra& a, int n, Rng& rng) {
  Ext x(n * n);
  for (auto& v : x) v = random_coords(a.dim(), rng);
  return x;
}

Ext perturb(const Ext& x, double step, Rng& rng) {
  Ext out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] + step * random_coords(static_cast<int>(x[i].size()), rng);
  return out;
}

ExtensionDefects measure_at(const EpsilonAlgebra& a, int n, int samples, Rng& rng, bool basis_stage,
                            DefectMethod& method) {
  ExtensionDefects e;
  e.n = n;
  const int dim = a.dim();
  auto absorb = [&](const Probe& p) {
    e.eps_submult = std::max(e.eps_submult, p.submult);
    e.eps_assoc = std::max(e.eps_assoc, p.assoc);
    e.eps_cstar = std::max(e.eps_cstar, p.cstar);
  };
  if (basis_stage && n == 1) {
    auto unit_vec = [&](int i) {
      Vec v = Vec::Zero(dim);
      v(i) = 1;
      return Ext{v};
    };
    if (dim <= 16) {
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          for (int k = 0; k < dim; ++k) absorb(probe(a, unit_vec(i), unit_vec(j), unit_vec(k), 1));
    } else {
      std::uniform_int_distribution<int> pick(0, dim - 1);
      for (int t = 0; t < 3000; ++t) absorb(probe(a, unit_vec(pick(rng)), unit_vec(pick(rng)), unit_vec(pick(rng)), 1));
    }
  }
  Ext wx, wy, wz;
  double worst = -1.0;
  for (int s = 0; s < samples; ++s) {
    Ext x = random_ext(a, n, rng), y = random_ext(a, n, rng), z = random_ext(a, n, rng);
    Probe p = probe(a, x, y, z, n);
    absorb(p);
    double score = p.assoc + p.cstar + p.submult;
    if (score > worst) {
      worst = score;
      wx = x, wy = y, wz = z;
    }
  }
  if (samples > 0) {
    method = DefectMethod::sampled;
    // local ascent from the worst sample
    double step = 0.3;
    int fails = 0;
    for (int it = 0; it < 60 && step > 1e-3; ++it) {
      Ext x = perturb(wx, step, rng), y = perturb(wy, step, rng), z = perturb(wz, step, rng);
      Probe p = probe(a, x, y, z, n);
      absorb(p);
      double score = p.assoc + p.cstar + p.submult;
      if (score > worst) {
        worst = score;
        wx = x, wy = y, wz = z;
        fails = 0;
      } else if (++fails >= 8) {
        step *= 0.5;
        fails = 0;
      }
    }
    method = DefectMethod::refined;
  }
  return e;
}

}  // namespace

DefectReport measure_defects(const EpsilonAlgebra& a, int samples, int extension_n, std::uint64_t seed) {
  Rng rng(seed);
  DefectReport r;
  r.method = DefectMethod::basis_bound;
  ExtensionDefects one = measure_at(a, 1, samples, rng, true, r.method);
  r.eps_submult = one.eps_submult;
  r.eps_assoc = one.eps_assoc;
  r.eps_cstar = one.eps_cstar;
  // unit axiom
  double nu = a.norm(a.unit);
  r.eps_unit = std::abs(nu - 1.0);
  auto unit_probe = [&](const Vec& x) {
    double nx = a.norm(x);
    if (nx == 0) return;
    r.eps_unit = std::max(r.eps_unit, a.norm(a.star(a.unit, x) - x) / nx);
    r.eps_unit = std::max(r.eps_unit, a.norm(a.star(x, a.unit) - x) / nx);
  };
  for (int i = 0; i < a.dim(); ++i) {
    Vec e = Vec::Zero(a.dim());
    e(i) = 1;
    unit_probe(e);
  }
  for (int s = 0; s < samples; ++s) unit_probe(random_coords(a.dim(), rng));
  r.sample_count = samples;
  for (int n = 2; n <= extension_n; ++n) {
    DefectMethod ignored;
    r.extensions.push_back(measure_at(a, n, std::max(10, samples / 4), rng, false, ignored));
  }
  return r;
}

EpsilonAlgebra exactify_unit(const EpsilonAlgebra& a, const Tolerances& tol) {
  const int n = a.dim();
  Mat id = Mat::Identity(n, n);
  Vec x = a.unit;
  auto residual = [&](const Vec& v) { return (a.star(v, v) - v).norm(); };
  double res = residual(x);
  if (res < 1e-14) return a;
  int it = 0;
  for (; it < tol.newton_max_iter && res > 1e-13; ++it) {
    Mat jac = a.left(x) + a.right(x) - id;
    Vec f = a.star(x, x) - x;
    Vec dx = jac.partialPivLu().solve(f);
    Vec next = x - dx;
    next = next.real().cast<cplx>();  // stay Hermitian
    double r2 = residual(next);
    if (!(r2 < res) && r2 > 1e-12) throw Error(ErrorKind::NewtonDiverged, "unit Newton residual grew");
    x = next;
    res = r2;
  }
  if (res > 1e-9) throw Error(ErrorKind::NewtonDiverged, "unit Newton did not converge");
  Mat linv = a.left(x).partialPivLu().inverse(), rinv = a.right(x).partialPivLu().inverse();
  EpsilonAlgebra out = a;
  out.unit = x;
  // T'(:, i+jN) = T · kron(L⁻¹e_j, R⁻¹e_i)
  std::vector<Mat> tr(n);
  for (int b = 0; b < n; ++b) tr[b] = a.tensor.middleCols(static_cast<Eigen::Index>(b) * n, n) * rinv;
  for (int j = 0; j < n; ++j) {
    Mat blk = Mat::Zero(n, n);
    for (int b = 0; b < n; ++b) blk += linv(b, j) * tr[b];
    out.tensor.middleCols(static_cast<Eigen::Index>(j) * n, n) = blk;
  }
  return out;
}

namespace {

std::vector<Mat> residual_probes(const Channel& ch, const Channel* phi_tilde, int samples, std::uint64_t seed) {
  Rng rng(seed);
  const int d = ch.dim_in;
  std::vector<Mat> probes;
  for (int s = 0; s < samples; ++s) {
    Mat x = random_gaussian(d, d, rng);
    probes.push_back(x);
    if (phi_tilde) probes.push_back(phi_tilde->apply(x));
  }
  return probes;
}

}  // namespace

double choi_residual_check(const Channel& ch, const Channel& phi_tilde, int samples, std::uint64_t seed) {
  auto st = to_stinespring(ch);
  const int d = ch.dim_in, f = st.env_dim;
  Mat proj = Mat::Identity(d * f, d * f) - st.v * st.v.adjoint();
  double worst = 0.0;
  for (const Mat& x : residual_probes(ch, &phi_tilde, samples, seed)) {
    double nx = operator_norm(x);
    if (nx == 0) continue;
    Mat c = proj * kron(ch.apply(x), Mat::Identity(f, f)) * st.v;
    Mat t = kron(c, Mat::Identity(f, f)) * st.v;
    worst = std::max(worst, operator_norm(t) / nx);
  }
  return worst;
}

double choi_residual_unlayered(const Channel& ch, int samples, std::uint64_t seed) {
  auto st = to_stinespring(ch);
  const int d = ch.dim_in, f = st.env_dim;
  Mat proj = Mat::Identity(d * f, d * f) - st.v * st.v.adjoint();
  double worst = 0.0;
  for (const Mat& x : residual_probes(ch, nullptr, samples, seed)) {
    double nx = operator_norm(x);
    Mat c = proj * kron(ch.apply(x), Mat::Identity(f, f)) * st.v;
    worst = std::max(worst, operator_norm(c) / nx);
  }
  return worst;
}

PhiAssocDefects phi_assoc_defects(const Channel& ch, int samples, std::uint64_t seed) {
  Rng rng(seed);
  const int d = ch.dim_in;
  PhiAssocDefects out;
  for (int s = 0; s < samples; ++s) {
    Mat x = random_gaussian(d, d, rng), y = random_gaussian(d, d, rng), z = random_gaussian(d, d, rng);
    double scale = operator_norm(x) * operator_norm(y) * operator_norm(z);
    Mat px = ch.apply(x), py = ch.apply(y), pz = ch.apply(z);
    Mat mid = ch.apply(px * py * pz);
    out.left = std::max(out.left, operator_norm(ch.apply(Mat(ch.apply(px * py) * pz)) - mid) / scale);
    out.right = std::max(out.right, operator_norm(ch.apply(Mat(px * ch.apply(py * pz))) - mid) / scale);
  }
  return out;
}

}  // namespace aiq
