#include "aiq/numlin.hpp"

namespace aiq {

namespace {

RMat hermitian_real_embedding(const std::vector<Mat>& ms) {
  const Eigen::Index n2 = ms.empty() ? 0 : ms[0].size();
  RMat out(2 * n2, 2 * static_cast<Eigen::Index>(ms.size()));
  for (size_t k = 0; k < ms.size(); ++k) {
    Mat h1 = hermitian_part(ms[k]);
    Mat h2 = (ms[k] - ms[k].adjoint()) / cplx(0.0, 2.0);
    Vec v1 = vec(h1), v2 = vec(h2);
    out.col(2 * k) << v1.real(), v1.imag();
    out.col(2 * k + 1) << v2.real(), v2.imag();
  }
  return out;
}

Mat from_real_embedding(const RVec& v, int m) {
  const Eigen::Index n2 = v.size() / 2;
  Vec c(n2);
  for (Eigen::Index i = 0; i < n2; ++i) c(i) = cplx(v(i), v(n2 + i));
  return hermitian_part(unvec(c, m, m));
}

}  // namespace

RVec singular_values(const Mat& m) {
  if (m.size() == 0) return RVec();
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues();
}

double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

double trace_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m).sum();
}

cplx hs_inner(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::DimMismatch, "hs_inner shapes differ");
  return (a.conjugate().cwiseProduct(b)).sum();
}

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).norm() <= tol * scale;
}

SpectralDecomposition herm_eig(const Mat& m, const Tolerances& tol) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::DimMismatch, "herm_eig needs a square matrix");
  const int n = static_cast<int>(m.rows());
  SpectralDecomposition out;
  if (n == 0) return out;
  double scale = std::max(1.0, m.norm());
  if ((m - m.adjoint()).norm() > tol.eq_tol * scale)
    throw Error(ErrorKind::NotHermitian, "input differs from its adjoint");
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(m));
  if (es.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "eigensolver failed");
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values(k) = es.eigenvalues()(n - 1 - k);
    Vec v = es.eigenvectors().col(n - 1 - k);
    Eigen::Index imax = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      // first index within rounding of the maximum keeps the choice stable
      double a = std::abs(v(i));
      if (a > best * (1.0 + 1e-9)) {
        best = a;
        imax = i;
      }
    }
    if (best > 0) v *= std::conj(v(imax)) / std::abs(v(imax));
    out.vectors.col(k) = v;
  }
  return out;
}

Mat spectral_function(const SpectralDecomposition& sd, const std::function<double(double)>& f) {
  const auto n = sd.values.size();
  RVec fv(n);
  for (Eigen::Index i = 0; i < n; ++i) fv(i) = f(sd.values(i));
  return sd.vectors * fv.cast<cplx>().asDiagonal() * sd.vectors.adjoint();
}

SqrtPair matrix_sqrt_inv_sqrt(const Mat& m, const Tolerances& tol) {
  auto sd = herm_eig(m, tol);
  if (sd.values.size() > 0 && sd.values(sd.values.size() - 1) <= tol.eq_tol)
    throw Error(ErrorKind::NotPositive, "minimum eigenvalue " + std::to_string(sd.values.minCoeff()));
  return {spectral_function(sd, [](double x) { return std::sqrt(x); }),
          spectral_function(sd, [](double x) { return 1.0 / std::sqrt(x); })};
}

Mat psd_sqrt(const Mat& m) {
  Tolerances loose;
  loose.eq_tol = 1e-6;
  auto sd = herm_eig(hermitian_part(m), loose);
  return spectral_function(sd, [](double x) { return x > 0 ? std::sqrt(x) : 0.0; });
}

Mat matrix_sign(const Mat& m, const Tolerances& tol) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::DimMismatch, "matrix_sign needs a square matrix");
  const int n = static_cast<int>(m.rows());
  if (n == 0) return m;
  Mat s = m;
  bool scaling = true;
  bool finishing = false;
  for (int it = 0; it < tol.newton_max_iter; ++it) {
    Eigen::PartialPivLU<Mat> lu(s);
    const auto& lu_m = lu.matrixLU();
    double logdet = 0.0;
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (int i = 0; i < n; ++i) {
      double a = std::abs(lu_m(i, i));
      dmin = std::min(dmin, a);
      dmax = std::max(dmax, a);
      logdet += std::log(a);
    }
    if (!(dmin > 1e-14 * dmax) || !std::isfinite(logdet))
      throw Error(ErrorKind::SingularIterate, "Newton iterate is numerically singular");
    Mat inv = lu.inverse();
    double mu = scaling ? std::exp(-logdet / n) : 1.0;
    Mat next = 0.5 * (mu * s + inv / mu);
    double diff = (next - s).norm() / std::max(1e-300, next.norm());
    s = std::move(next);
    if (!s.allFinite()) throw Error(ErrorKind::NoConvergence, "Newton iterate overflowed");
    if (finishing) break;
    if (diff < 1e-2) scaling = false;
    if (diff < 1e-9) finishing = true;  // one more quadratic step reaches rounding level
  }
  double err = operator_norm(s * s - Mat::Identity(n, n));
  double allowed = std::max(tol.eq_tol, 1e-13 * n * std::pow(std::max(1.0, operator_norm(s)), 2));
  if (!(err <= allowed)) throw Error(ErrorKind::NoConvergence, "sign iteration did not reach S^2 = I");
  return s;
}

Mat theta(const Mat& m, const Tolerances& tol) {
  const auto n = m.rows();
  return 0.5 * (Mat::Identity(n, n) + matrix_sign(m, tol));
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vec kron(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Mat partial_trace(const Mat& m, const std::vector<int>& dims, const std::vector<int>& keep) {
  long total = 1;
  for (int d : dims) {
    if (d <= 0) throw Error(ErrorKind::DimMismatch, "nonpositive subsystem dimension");
    total *= d;
  }
  if (m.rows() != total || m.cols() != total) throw Error(ErrorKind::DimMismatch, "dims do not match matrix size");
  const int k = static_cast<int>(dims.size());
  std::vector<bool> kept(k, false);
  for (int s : keep) {
    if (s < 0 || s >= k) throw Error(ErrorKind::DimMismatch, "keep index out of range");
    kept[s] = true;
  }
  std::vector<long> stride(k, 1);
  for (int s = k - 2; s >= 0; --s) stride[s] = stride[s + 1] * dims[s + 1];
  long kept_total = 1, traced_total = 1;
  std::vector<int> kdims, tdims;
  std::vector<long> kstride, tstride;
  for (int s = 0; s < k; ++s) {
    if (kept[s]) {
      kdims.push_back(dims[s]);
      kstride.push_back(stride[s]);
      kept_total *= dims[s];
    } else {
      tdims.push_back(dims[s]);
      tstride.push_back(stride[s]);
      traced_total *= dims[s];
    }
  }
  auto offsets = [](const std::vector<int>& ds, const std::vector<long>& st, long count) {
    std::vector<long> off(count, 0);
    for (long idx = 0; idx < count; ++idx) {
      long rem = idx, o = 0;
      for (int s = static_cast<int>(ds.size()) - 1; s >= 0; --s) {
        o += (rem % ds[s]) * st[s];
        rem /= ds[s];
      }
      off[idx] = o;
    }
    return off;
  };
  auto koff = offsets(kdims, kstride, kept_total);
  auto toff = offsets(tdims, tstride, traced_total);
  Mat out = Mat::Zero(kept_total, kept_total);
  for (long a = 0; a < kept_total; ++a)
    for (long b = 0; b < kept_total; ++b) {
      cplx acc = 0;
      for (long t = 0; t < traced_total; ++t) acc += m(koff[a] + toff[t], koff[b] + toff[t]);
      out(a, b) = acc;
    }
  return out;
}

Mat unvec(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw Error(ErrorKind::DimMismatch, "unvec size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

Mat transpose_permutation(int n) {
  Mat k = Mat::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k(j + i * n, i + j * n) = 1.0;
  return k;
}

Mat column_space(const Mat& m, double rel_tol) {
  if (m.cols() == 0 || m.rows() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const RVec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return Mat(m.rows(), 0);
  int r = 0;
  while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

Mat column_space_abs(const Mat& m, double abs_tol) {
  if (m.cols() == 0 || m.rows() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const RVec& s = svd.singularValues();
  int r = 0;
  while (r < s.size() && s(r) > abs_tol) ++r;
  return svd.matrixU().leftCols(r);
}

RMat real_column_space(const RMat& m, double rel_tol) {
  if (m.cols() == 0 || m.rows() == 0) return RMat(m.rows(), 0);
  Eigen::JacobiSVD<RMat> svd(m, Eigen::ComputeThinU);
  const RVec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return RMat(m.rows(), 0);
  int r = 0;
  while (r < s.size() && s(r) > rel_tol * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

Mat null_space(const Mat& m, double rel_tol) {
  const auto n = m.cols();
  if (m.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const RVec& s = svd.singularValues();
  double top = s.size() ? s(0) : 0.0;
  int r = 0;
  while (r < s.size() && s(r) > rel_tol * std::max(top, 1e-300)) ++r;
  if (top == 0.0) r = 0;
  return svd.matrixV().rightCols(n - r);
}

Mat polar_unitary(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Mat random_gaussian(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      double re = g(rng);
      double im = g(rng);
      m(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return m;
}

Mat random_unitary(int n, Rng& rng) {
  Mat g = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    cplx d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

Mat random_density(int n, Rng& rng) {
  Mat g = random_gaussian(n, n, rng);
  Mat rho = g * g.adjoint();
  return rho / rho.trace().real();
}

RVec random_real(int n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  RVec v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

std::vector<Mat> hermitian_span_basis(const std::vector<Mat>& ms, int m, double rel_tol) {
  if (ms.empty()) return {};
  RMat q = real_column_space(hermitian_real_embedding(ms), rel_tol);
  std::vector<Mat> out;
  for (Eigen::Index k = 0; k < q.cols(); ++k) out.push_back(from_real_embedding(q.col(k), m));
  return out;
}


}  // namespace aiq
