#include "aiq/cbnorm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace aiq {

namespace {

using Blocks = std::vector<Mat>;

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += hs_inner(a[k], b[k]).real();
  return s;
}

double fro(const Blocks& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

// Re Tr(A_i Z) for every constraint
RVec apply_a(const SdpProblem& p, const Blocks& z) {
  RVec out(p.a.size());
  for (size_t i = 0; i < p.a.size(); ++i) {
    cplx acc = 0;
    for (const auto& e : p.a[i]) acc += e.value * z[e.block](e.col, e.row);
    out(i) = acc.real();
  }
  return out;
}

Blocks apply_at(const SdpProblem& p, const RVec& y) {
  Blocks out;
  for (int n : p.blocks) out.push_back(Mat::Zero(n, n));
  for (size_t i = 0; i < p.a.size(); ++i)
    for (const auto& e : p.a[i]) out[e.block](e.row, e.col) += y(i) * e.value;
  return out;
}

// largest α with X + αD ⪰ 0 (infinity when D ⪰ 0)
double max_step(const Mat& x, const Mat& d) {
  Eigen::LLT<Mat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  Mat l = llt.matrixL();
  Mat t = l.triangularView<Eigen::Lower>().solve(d);
  Mat u = l.triangularView<Eigen::Lower>().solve(Mat(t.adjoint()));
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(u), Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues()(0);
  return lmin < 0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

Mat inverse_pd(const Mat& s) {
  Eigen::LLT<Mat> llt(s);
  if (llt.info() != Eigen::Success) return s.inverse();
  return llt.solve(Mat::Identity(s.rows(), s.cols()));
}

// Hermitian basis of n×n matrices, orthonormal for the real HS inner product, listed entrywise
std::vector<std::vector<std::pair<std::pair<int, int>, cplx>>> hermitian_units(int n) {
  std::vector<std::vector<std::pair<std::pair<int, int>, cplx>>> out;
  const double r = 1.0 / std::sqrt(2.0);
  for (int p = 0; p < n; ++p) out.push_back({{{p, p}, 1.0}});
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) {
      out.push_back({{{p, q}, r}, {{q, p}, r}});
      out.push_back({{{p, q}, cplx(0, r)}, {{q, p}, cplx(0, -r)}});
    }
  return out;
}

Mat ptrace_out(const Mat& y, int din, int dout) { return ptrace_second(y, din, dout); }

double lambda_min(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double lambda_max(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

Mat density_from(const Mat& m) {
  auto sd = herm_eig(hermitian_part(m), Tolerances{1e-6, 1e-6, 100});
  Mat r = spectral_function(sd, [](double x) { return std::max(x, 0.0); });
  double t = r.trace().real();
  if (!(t > 0)) return Mat::Identity(m.rows(), m.cols()) / double(m.rows());
  return r / t;
}

Mat truncate_density(const Mat& rho, double rel) {
  auto sd = herm_eig(rho, Tolerances{1e-6, 1e-6, 100});
  double top = sd.values(0);
  Mat r = spectral_function(sd, [&](double x) { return x > rel * top ? x : 0.0; });
  return r / r.trace().real();
}

Mat psi_adjoint_apply(const Channel& psi, const Mat& a) {
  return unvec(psi.superop.adjoint() * vec(a), psi.dim_in, psi.dim_in);
}

// (1⊗Ψ)(u u†) with u blocked by the reference index
Mat extend_on_pure(const Channel& psi, const Vec& u) {
  const int di = psi.dim_in, dout = psi.dim_out;
  Mat z(di * dout, di * dout);
  for (int i = 0; i < di; ++i)
    for (int k = 0; k < di; ++k) {
      Mat op = u.segment(i * di, di) * u.segment(k * di, di).adjoint();
      z.block(i * dout, k * dout, dout, dout) = psi.apply(op);
    }
  return z;
}

double seesaw_from(const Channel& psi, Vec u, int max_iter = 400) {
  const int di = psi.dim_in, dout = psi.dim_out;
  u.normalize();
  double best = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Mat z = extend_on_pure(psi, u);
    double val = trace_norm(z);
    if (it > 0 && val <= best * (1 + 1e-13) + 1e-300) {
      best = std::max(best, val);
      break;
    }
    best = std::max(best, val);
    Mat w = polar_unitary(z);
    Mat k(di * di, di * di);
    for (int i = 0; i < di; ++i)
      for (int kk = 0; kk < di; ++kk)
        k.block(kk * di, i * di, di, di) = psi_adjoint_apply(psi, w.block(i * dout, kk * dout, dout, dout)).adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(k));
    u = es.eigenvectors().col(di * di - 1);
  }
  return best;
}

Vec purification(const Mat& rho) {
  Mat a = psd_sqrt(rho);
  const int d = static_cast<int>(rho.rows());
  Vec u(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) u(i * d + j) = a(i, j);
  return u;
}

double best_lower(const Mat& jn, const Channel& psin, const Mat& rho0, const Mat& rho1, bool polish) {
  const int din = psin.dim_in, dout = psin.dim_out;
  double lo = diamond_value_at(jn, din, dout, rho0, rho1);
  lo = std::max(lo, diamond_value_at(jn, din, dout, rho0, rho0));
  lo = std::max(lo, diamond_value_at(jn, din, dout, rho1, rho1));
  for (double rel : {1e-8, 1e-6, 1e-4}) {
    Mat t = truncate_density(rho0, rel);
    lo = std::max(lo, diamond_value_at(jn, din, dout, t, t));
  }
  if (polish) lo = std::max(lo, seesaw_from(psin, purification(rho0), 60));
  return lo;
}

NormCertificate finish(double lo, double up, double scale, int iters, bool converged) {
  NormCertificate c;
  c.lower = lo * scale;
  c.upper = std::max(up, lo) * scale;
  c.value = 0.5 * (c.lower + c.upper);
  c.gap = c.upper - c.lower;
  c.iterations = iters;
  c.stalled = !converged || c.gap > 1e-6 * std::max(1.0, c.value);
  return c;
}

NormCertificate diamond_hermitian(const Mat& jn, const Channel& psin, const SdpOptions& opt) {
  const int din = psin.dim_in, dout = psin.dim_out, n = din * dout;
  SdpProblem p;
  p.blocks = {n, n, din};
  p.c = {-jn, jn, Mat::Zero(din, din)};
  auto units = hermitian_units(n);
  for (const auto& u : units) {
    std::vector<SdpEntry> row;
    for (const auto& [pq, v] : u) {
      row.push_back({0, pq.first, pq.second, v});
      row.push_back({1, pq.first, pq.second, v});
      if (pq.first % dout == pq.second % dout) row.push_back({2, pq.first / dout, pq.second / dout, -v});
    }
    p.a.push_back(std::move(row));
  }
  std::vector<SdpEntry> tr;
  for (int a = 0; a < din; ++a) tr.push_back({2, a, a, 1.0});
  p.a.push_back(tr);
  p.b = RVec::Zero(p.a.size());
  p.b(p.a.size() - 1) = 1.0;

  SdpResult r = solve_sdp(p, opt);
  RVec yy = r.y;
  yy(yy.size() - 1) = 0.0;
  Mat y = -apply_at(p, yy)[0];
  double shift = std::max({0.0, -lambda_min(y - jn), -lambda_min(y + jn)});
  Mat yf = y + shift * Mat::Identity(n, n);
  double up = lambda_max(ptrace_out(yf, din, dout));
  Mat rho = density_from(r.x[2]);
  double lo = best_lower(jn, psin, rho, Mat(rho.transpose()), true);
  return finish(lo, up, 1.0, r.iterations, r.converged);
}

NormCertificate diamond_general(const Mat& jn, const Channel& psin, const SdpOptions& opt) {
  const int din = psin.dim_in, dout = psin.dim_out, n = din * dout;
  SdpProblem p;
  p.blocks = {2 * n, din, din};
  Mat c = Mat::Zero(2 * n, 2 * n);
  c.topRightCorner(n, n) = -0.5 * jn;
  c.bottomLeftCorner(n, n) = -0.5 * jn.adjoint();
  p.c = {c, Mat::Zero(din, din), Mat::Zero(din, din)};
  auto units = hermitian_units(n);
  for (int side = 0; side < 2; ++side)
    for (const auto& u : units) {
      std::vector<SdpEntry> row;
      for (const auto& [pq, v] : u) {
        row.push_back({0, pq.first + side * n, pq.second + side * n, v});
        if (pq.first % dout == pq.second % dout) row.push_back({1 + side, pq.first / dout, pq.second / dout, -v});
      }
      p.a.push_back(std::move(row));
    }
  for (int side = 0; side < 2; ++side) {
    std::vector<SdpEntry> tr;
    for (int a = 0; a < din; ++a) tr.push_back({1 + side, a, a, 1.0});
    p.a.push_back(tr);
  }
  p.b = RVec::Zero(p.a.size());
  p.b(p.a.size() - 1) = p.b(p.a.size() - 2) = 1.0;

  SdpResult r = solve_sdp(p, opt);
  RVec yy = r.y;
  yy(yy.size() - 1) = yy(yy.size() - 2) = 0.0;
  Mat ysum = apply_at(p, yy)[0];
  Mat y0 = -2.0 * ysum.topLeftCorner(n, n), y1 = -2.0 * ysum.bottomRightCorner(n, n);
  Mat big(2 * n, 2 * n);
  big << y0, -jn, -jn.adjoint(), y1;
  double shift = std::max(0.0, -lambda_min(big));
  Mat id = Mat::Identity(n, n);
  double up = 0.5 * (lambda_max(ptrace_out(y0 + shift * id, din, dout)) +
                     lambda_max(ptrace_out(y1 + shift * id, din, dout)));
  Mat rho0 = density_from(r.x[1]), rho1 = density_from(r.x[2]);
  double lo = best_lower(jn, psin, rho0, rho1, false);
  return finish(lo, up, 1.0, r.iterations, r.converged);
}

}  // namespace

SdpResult solve_sdp(const SdpProblem& p, const SdpOptions& opt) {
  const size_t nb = p.blocks.size();
  const int m = static_cast<int>(p.a.size());
  if (p.c.size() != nb || p.b.size() != m) throw Error(ErrorKind::DimMismatch, "SDP data sizes");
  for (size_t k = 0; k < nb; ++k) {
    if (p.c[k].rows() != p.blocks[k] || p.c[k].cols() != p.blocks[k])
      throw Error(ErrorKind::DimMismatch, "objective block shape");
    if (!is_hermitian(p.c[k], 1e-12)) throw Error(ErrorKind::NotHermitian, "objective block");
  }
  for (const auto& row : p.a)
    for (const auto& e : row)
      if (e.block < 0 || e.block >= static_cast<int>(nb) || e.row < 0 || e.col < 0 || e.row >= p.blocks[e.block] ||
          e.col >= p.blocks[e.block])
        throw Error(ErrorKind::DimMismatch, "constraint entry out of range");

  int ntot = 0;
  for (int n : p.blocks) ntot += n;
  double cnorm = fro(p.c), bnorm = p.b.norm();
  double anorm_max = 0.0, xi = 10.0;
  for (int i = 0; i < m; ++i) {
    double an = 0;
    for (const auto& e : p.a[i]) an += std::norm(e.value);
    an = std::sqrt(an);
    anorm_max = std::max(anorm_max, an);
    xi = std::max(xi, ntot * (1 + std::abs(p.b(i))) / (1 + an));
  }
  double zeta = std::max({10.0, std::sqrt(double(ntot)), cnorm, anorm_max});
  xi = std::max(xi, std::sqrt(double(ntot)));

  SdpResult r;
  Blocks x, s;
  for (int n : p.blocks) {
    x.push_back(xi * Mat::Identity(n, n));
    s.push_back(zeta * Mat::Identity(n, n));
  }
  RVec y = RVec::Zero(m);

  // entries grouped per block speed up the Schur complement
  std::vector<std::vector<std::vector<SdpEntry>>> by_block(m, std::vector<std::vector<SdpEntry>>(nb));
  for (int i = 0; i < m; ++i)
    for (const auto& e : p.a[i]) by_block[i][e.block].push_back(e);

  int slow = 0, since_best = 0;
  double best_merit = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iter; ++it) {
    r.iterations = it;
    Blocks sinv(nb);
    for (size_t k = 0; k < nb; ++k) sinv[k] = inverse_pd(s[k]);
    RVec rp = p.b - apply_a(p, x);
    Blocks aty = apply_at(p, y);
    Blocks rd(nb);
    for (size_t k = 0; k < nb; ++k) rd[k] = p.c[k] - s[k] - aty[k];
    double xs = inner(x, s);
    double mu = xs / ntot;
    double pobj = inner(p.c, x), dobj = p.b.dot(y);
    r.primal_infeas = rp.norm() / (1 + bnorm);
    r.dual_infeas = fro(rd) / (1 + cnorm);
    double relgap = std::abs(xs) / (1 + std::abs(pobj) + std::abs(dobj));
    const double merit = std::max({relgap, r.primal_infeas, r.dual_infeas});
    if (merit < opt.tol) {
      r.converged = true;
      break;
    }
    // near the optimum the Schur system loses accuracy and the merit stops improving
    if (merit < 0.5 * best_merit) {
      best_merit = merit;
      since_best = 0;
    } else if (++since_best >= 4 && best_merit < 1e-6) {
      r.converged = best_merit < 1e-8;
      break;
    }
    if (fro(x) > 1e12 || y.norm() > 1e12) throw Error(ErrorKind::Infeasible, "iterates diverge");

    RMat schur = RMat::Zero(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        cplx acc = 0;
        for (size_t k = 0; k < nb; ++k) {
          const auto& ei = by_block[i][k];
          if (ei.empty()) continue;
          const auto& ej = by_block[j][k];
          for (const auto& e : ei)
            for (const auto& f : ej) acc += e.value * f.value * x[k](e.col, f.row) * sinv[k](f.col, e.row);
        }
        schur(i, j) = schur(j, i) = acc.real();
      }
    Eigen::LLT<RMat> chol(schur);
    bool use_ldlt = chol.info() != Eigen::Success;
    Eigen::LDLT<RMat> ldlt;
    if (use_ldlt) ldlt.compute(schur);
    auto solve = [&](const RVec& rhs) -> RVec { return use_ldlt ? RVec(ldlt.solve(rhs)) : RVec(chol.solve(rhs)); };

    Blocks xrds(nb);
    for (size_t k = 0; k < nb; ++k) xrds[k] = x[k] * rd[k] * sinv[k];
    RVec base = p.b + apply_a(p, xrds);

    auto direction = [&](double sigma, const Blocks* corr, Blocks& dx, RVec& dy, Blocks& ds) {
      RVec rhs = base - sigma * mu * apply_a(p, sinv);
      if (corr) rhs += apply_a(p, *corr);
      dy = solve(rhs);
      Blocks atdy = apply_at(p, dy);
      ds.resize(nb);
      dx.resize(nb);
      for (size_t k = 0; k < nb; ++k) {
        ds[k] = rd[k] - atdy[k];
        Mat t = sigma * mu * sinv[k] - x[k] - x[k] * ds[k] * sinv[k];
        if (corr) t -= (*corr)[k];
        dx[k] = hermitian_part(t);
      }
    };
    auto steps = [&](const Blocks& dx, const Blocks& ds) {
      double ap = std::numeric_limits<double>::infinity(), ad = ap;
      for (size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(x[k], dx[k]));
        ad = std::min(ad, max_step(s[k], ds[k]));
      }
      return std::make_pair(std::min(1.0, opt.step_fraction * ap), std::min(1.0, opt.step_fraction * ad));
    };

    Blocks dxa, dsa;
    RVec dya;
    direction(0.0, nullptr, dxa, dya, dsa);
    auto [apa, ada] = steps(dxa, dsa);
    Blocks xa(nb), sa(nb);
    for (size_t k = 0; k < nb; ++k) {
      xa[k] = x[k] + apa * dxa[k];
      sa[k] = s[k] + ada * dsa[k];
    }
    double ratio = std::max(0.0, inner(xa, sa)) / std::max(xs, 1e-300);
    double sigma = std::clamp(std::pow(ratio, 3), 0.0, 1.0);

    Blocks corr(nb);
    for (size_t k = 0; k < nb; ++k) corr[k] = dxa[k] * dsa[k] * sinv[k];
    Blocks dx, ds;
    RVec dy;
    direction(sigma, &corr, dx, dy, ds);
    auto [ap, ad] = steps(dx, ds);
    for (size_t k = 0; k < nb; ++k) {
      x[k] = hermitian_part(Mat(x[k] + ap * dx[k]));
      s[k] = hermitian_part(Mat(s[k] + ad * ds[k]));
    }
    y += ad * dy;
    slow = (ap < 1e-6 && ad < 1e-6) ? slow + 1 : 0;
    if (slow >= 3) break;
    r.iterations = it + 1;
  }
  r.x = x;
  r.s = s;
  r.y = y;
  r.primal_obj = inner(p.c, x);
  r.dual_obj = p.b.dot(y);
  r.gap = r.primal_obj - r.dual_obj;
  return r;
}

double diamond_value_at(const Mat& choi, int din, int dout, const Mat& rho0, const Mat& rho1) {
  Mat id = Mat::Identity(dout, dout);
  return trace_norm(kron(psd_sqrt(rho0), id) * choi * kron(psd_sqrt(rho1), id));
}

NormCertificate diamond_norm(const Channel& psi, const SdpOptions& opt) {
  Mat j = to_choi(psi);
  double scale = j.norm();
  if (scale == 0.0) return NormCertificate{};
  Mat jn = j / scale;
  Channel psin(psi.dim_in, psi.dim_out, psi.superop / scale, psi.picture);
  NormCertificate c = is_hermitian(jn, 1e-12) ? diamond_hermitian(hermitian_part(jn), psin, opt)
                                              : diamond_general(jn, psin, opt);
  c.value *= scale;
  c.upper *= scale;
  c.lower *= scale;
  c.gap *= scale;
  c.stalled = c.stalled && c.gap > 1e-6 * std::max(1.0, c.value);
  return c;
}

NormCertificate cb_norm(const Channel& lambda, const SdpOptions& opt) { return diamond_norm(dual(lambda), opt); }

double diamond_lower_bound_seesaw(const Channel& psi, int restarts, std::uint64_t seed) {
  if (psi.superop.norm() == 0.0) return 0.0;
  Rng rng(seed);
  const int di = psi.dim_in;
  double best = 0.0;
  for (int t = 0; t < restarts; ++t) {
    Vec u = random_gaussian(di * di, 1, rng).col(0);
    best = std::max(best, seesaw_from(psi, u));
  }
  return best;
}

double cb_lower_bound_sampled(const Channel& lambda, int n, int samples, std::uint64_t seed) {
  Rng rng(seed);
  const int di = lambda.dim_in, dout = lambda.dim_out;
  double best = 0.0;
  for (int t = 0; t < samples; ++t) {
    Mat x = random_unitary(n * di, rng);
    Mat out(n * dout, n * dout);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) out.block(a * dout, b * dout, dout, dout) = lambda.apply(x.block(a * di, b * di, di, di));
    best = std::max(best, operator_norm(out));
  }
  return best;
}

}  // namespace aiq
