#include "aiq/projections.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aiq {

namespace {

Vec real_coords(const Vec& x) { return x.real().cast<cplx>(); }

double coord_inner_re(const Vec& a, const Vec& b) { return a.dot(b).real(); }

}  // namespace

DeltaProjection make_projection(const EpsilonAlgebra& a, const Vec& coords) {
  DeltaProjection p;
  p.coords = coords;
  p.delta = a.norm(a.star(coords, coords) - coords);
  p.norm = a.norm(coords);
  return p;
}

DeltaProjection refine_projection(const EpsilonAlgebra& a, const Vec& coords, int max_iter) {
  DeltaProjection best = make_projection(a, real_coords(coords));
  Vec p = best.coords;
  for (int it = 0; it < max_iter && best.delta > 1e-15; ++it) {
    Vec p2 = a.star(p, p);
    Vec next = real_coords(3.0 * p2 - 2.0 * a.star(p, p2));
    DeltaProjection cand = make_projection(a, next);
    if (!(cand.delta < 0.99 * best.delta)) {
      if (cand.delta < best.delta) best = cand;
      break;
    }
    best = cand;
    p = next;
  }
  return best;
}

CompressionMap compression(const EpsilonAlgebra& a, const DeltaProjection& p, const DeltaProjection& q,
                           const Tolerances& tol) {
  const int n = a.dim();
  Mat lp = a.left(p.coords), rq = a.right(q.coords);
  Mat lr = lp * rq;
  Mat m = lr + rq * lp - Mat::Identity(n, n);
  CompressionMap c;
  c.p = p;
  c.q = q;
  try {
    c.matrix = theta(m, tol);
  } catch (const Error& e) {
    throw Error(ErrorKind::SignDiverged, std::string("compression sign iteration: ") + e.what());
  }
  c.image = column_space_abs(c.matrix, 0.5);
  c.lr_distance = operator_norm(lr - c.matrix);
  return c;
}

Vec compressed_product(const EpsilonAlgebra& a, const CompressionMap& c_pq, const CompressionMap& c_qr,
                       const CompressionMap& c_pr, const Vec& x, const Vec& y, double membership_tol) {
  auto check = [&](const CompressionMap& c, const Vec& v, const char* what) {
    if ((c.apply(v) - v).norm() > membership_tol * std::max(1.0, v.norm()))
      throw Error(ErrorKind::MembershipViolation, std::string(what) + " is not in its compressed subspace");
  };
  check(c_pq, x, "left factor");
  check(c_qr, y, "right factor");
  return c_pr.apply(a.star(x, y));
}

Corner compress_algebra(const EpsilonAlgebra& a, const CompressionMap& c_pp) {
  const int d = a.ambient;
  std::vector<Mat> ms;
  for (Eigen::Index k = 0; k < c_pp.image.cols(); ++k) ms.push_back(a.to_matrix(c_pp.image.col(k)));
  std::vector<Mat> basis = hermitian_span_basis(ms, d);
  const int k = static_cast<int>(basis.size());
  Corner out;
  out.embed.resize(a.dim(), k);
  for (int i = 0; i < k; ++i) out.embed.col(i) = real_coords(a.coords_of(basis[i]));
  Mat back = out.embed.adjoint() * c_pp.matrix;  // A coordinates -> corner coordinates

  EpsilonAlgebra& c = out.alg;
  c.ambient = d;
  c.basis = basis;
  c.bmat.resize(static_cast<Eigen::Index>(d) * d, k);
  for (int i = 0; i < k; ++i) c.bmat.col(i) = vec(basis[i]);
  c.projector = back * a.projector;
  c.unit = back * c_pp.p.coords;
  c.tensor.resize(k, static_cast<Eigen::Index>(k) * k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i)
      c.tensor.col(i + static_cast<Eigen::Index>(j) * k) = back * a.star(out.embed.col(i), out.embed.col(j));
  Mat sym = c.tensor;
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i)
      sym.col(i + static_cast<Eigen::Index>(j) * k) =
          0.5 * (c.tensor.col(i + static_cast<Eigen::Index>(j) * k) + c.tensor.col(j + static_cast<Eigen::Index>(i) * k).conjugate());
  c.tensor = sym;
  return out;
}

DeltaProjection find_nontrivial_projection(const EpsilonAlgebra& a, double delta_target, int max_retries,
                                           std::uint64_t seed) {
  if (a.dim() <= 1) throw Error(ErrorKind::SearchExhausted, "algebra is one-dimensional");
  Rng rng(seed);
  const Mat u = a.to_matrix(a.unit);
  const double unit_norm = a.norm(a.unit);
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Vec xc = random_real(a.dim(), rng).cast<cplx>();
    Mat x = hermitian_part(a.to_matrix(xc));
    const double nx = operator_norm(x);
    if (nx == 0) continue;
    // lift the unit's support above everything else, then cut inside it
    auto sd = herm_eig(hermitian_part(x + 3.0 * nx * u));
    std::vector<double> support;
    for (Eigen::Index i = 0; i < sd.values.size(); ++i)
      if (sd.values(i) > 1.5 * nx) support.push_back(sd.values(i));
    if (support.size() < 2) continue;
    const double spread = support.front() - support.back();
    std::vector<std::pair<double, double>> cuts;  // (distance from median rank, threshold)
    const double median = 0.5 * (support.size() - 1);
    for (size_t i = 0; i + 1 < support.size(); ++i)
      if (support[i] - support[i + 1] > 1e-2 * spread)
        cuts.emplace_back(std::abs(i + 0.5 - median), 0.5 * (support[i] + support[i + 1]));
    std::sort(cuts.begin(), cuts.end());
    for (const auto& [dist, thr] : cuts) {
      (void)dist;
      Mat pi = spectral_function(sd, [thr](double v) { return v > thr ? 1.0 : 0.0; });
      Vec coords = real_coords(a.project(pi));
      DeltaProjection p = refine_projection(a, coords);
      if (p.delta > delta_target) continue;
      double co = a.norm(a.unit - p.coords);
      if (std::min(p.norm, co) >= 0.5 * unit_norm) return p;
    }
  }
  throw Error(ErrorKind::SearchExhausted, "no nontrivial projection after " + std::to_string(max_retries) + " attempts");
}

cplx inner_product(const EpsilonAlgebra& a, const CompressionMap& c_q, const Vec& q_tilde, const Vec& y,
                   const Vec& x) {
  Vec w = c_q.apply(a.star(a.adjoint(y), x));
  return q_tilde.dot(w) / q_tilde.squaredNorm();
}

SubspaceHilbert hilbert_structure(const EpsilonAlgebra& a, const CompressionMap& c_pq, const CompressionMap& c_q) {
  if (c_q.dim() != 1) throw Error(ErrorKind::DimMismatch, "Q is not one-dimensional");
  SubspaceHilbert s;
  s.c_pq = c_pq;
  s.c_q = c_q;
  s.q_tilde = c_q.apply(c_q.q.coords);
  const int k = c_pq.dim();
  s.gram = Mat::Zero(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) s.gram(i, j) = inner_product(a, c_q, s.q_tilde, c_pq.image.col(i), c_pq.image.col(j));
  s.gram = hermitian_part(s.gram);
  if (k == 0) {
    s.onb = Mat(0, 0);
    return s;
  }
  auto sd = herm_eig(s.gram);
  const double top = sd.values(0), low = sd.values(k - 1);
  s.min_gram_eig = top > 0 ? low / top : 0.0;
  if (!(low > 1e-8 * std::max(top, 1e-300)) || top <= 0)
    throw Error(ErrorKind::DegenerateGram, "Gram matrix is not positive definite");
  s.onb = sd.vectors * sd.values.cwiseInverse().cwiseSqrt().cast<cplx>().asDiagonal();
  return s;
}

Mat h_map(const EpsilonAlgebra& a, const SubspaceHilbert& s_pq, const SubspaceHilbert& s_rq,
          const CompressionMap& c_pr, const Vec& z) {
  if (s_pq.min_gram_eig <= 1e-8 && s_pq.c_pq.dim() > 0) throw Error(ErrorKind::SingularGram, "S_{P,Q} Gram is singular");
  if ((c_pr.apply(z) - z).norm() > 1e-8 * std::max(1.0, z.norm()))
    throw Error(ErrorKind::MembershipViolation, "Z is not in S_{P,R}");
  const int kp = s_pq.c_pq.dim(), kr = s_rq.c_pq.dim();
  Mat h = Mat::Zero(kp, kr);
  if (z.norm() == 0) return h;
  const CompressionMap& c_q = s_pq.c_q;
  CompressionMap c_qr = compression(a, s_pq.c_q.q, c_pr.q);
  auto scalar = [&](const Vec& w) { return s_pq.q_tilde.dot(c_q.apply(w)) / s_pq.q_tilde.squaredNorm(); };
  std::vector<Vec> zx(kr);
  for (int b = 0; b < kr; ++b) zx[b] = s_pq.c_pq.apply(a.star(z, s_rq.element(b)));
  for (int i = 0; i < kp; ++i) {
    Vec ya = a.adjoint(s_pq.element(i));
    Vec yz = c_qr.apply(a.star(ya, z));
    for (int b = 0; b < kr; ++b) h(i, b) = 0.5 * (scalar(a.star(yz, s_rq.element(b))) + scalar(a.star(ya, zx[b])));
  }
  return h;
}

std::vector<std::vector<int>> classify_equivalence(const EpsilonAlgebra& a, const std::vector<DeltaProjection>& ps,
                                                   double gray_lo, double gray_hi) {
  const int n = static_cast<int>(ps.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      double ind = operator_norm(a.left(ps[j].coords) * a.right(ps[k].coords));
      if (ind >= gray_lo && ind <= gray_hi)
        throw Error(ErrorKind::AmbiguousRank, "equivalence indicator " + std::to_string(ind) + " in the gray zone");
      if (ind > gray_hi) parent[find(j)] = find(k);
    }
  std::vector<std::vector<int>> classes;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(classes.size());
      classes.emplace_back();
    }
    classes[slot[r]].push_back(i);
  }
  return classes;
}

}  // namespace aiq
