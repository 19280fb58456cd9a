#include "aiq/channels.hpp"

namespace aiq {

Channel operator-(const Channel& a, const Channel& b) {
  if (a.dim_in != b.dim_in || a.dim_out != b.dim_out) throw Error(ErrorKind::DimMismatch, "difference of maps");
  return Channel(a.dim_in, a.dim_out, a.superop - b.superop, a.picture);
}

Channel operator+(const Channel& a, const Channel& b) {
  if (a.dim_in != b.dim_in || a.dim_out != b.dim_out) throw Error(ErrorKind::DimMismatch, "sum of maps");
  return Channel(a.dim_in, a.dim_out, a.superop + b.superop, a.picture);
}

Channel from_function(int din, int dout, const std::function<Mat(const Mat&)>& f,
                             Picture p) {
  Mat s(static_cast<Eigen::Index>(dout) * dout, static_cast<Eigen::Index>(din) * din);
  for (int j = 0; j < din; ++j)
    for (int i = 0; i < din; ++i) {
      Mat e = Mat::Zero(din, din);
      e(i, j) = 1.0;
      Mat y = f(e);
      if (y.rows() != dout || y.cols() != dout) throw Error(ErrorKind::DimMismatch, "function output shape");
      s.col(i + j * din) = vec(y);
    }
  return Channel(din, dout, std::move(s), p);
}

Channel from_kraus(const std::vector<Mat>& ks, Picture p) {
  if (ks.empty()) throw Error(ErrorKind::DimMismatch, "empty Kraus list");
  const int dout = static_cast<int>(ks[0].rows()), din = static_cast<int>(ks[0].cols());
  Mat s = Mat::Zero(static_cast<Eigen::Index>(dout) * dout, static_cast<Eigen::Index>(din) * din);
  for (const auto& k : ks) {
    if (k.rows() != dout || k.cols() != din) throw Error(ErrorKind::DimMismatch, "Kraus shapes differ");
    s += kron(Mat(k.conjugate()), k);
  }
  return Channel(din, dout, std::move(s), p);
}

Mat to_choi(const Channel& ch) {
  const int din = ch.dim_in, dout = ch.dim_out;
  Mat j(din * dout, din * dout);
  for (int a = 0; a < din; ++a)
    for (int b = 0; b < din; ++b)
      for (int r = 0; r < dout; ++r)
        for (int s = 0; s < dout; ++s) j(a * dout + r, b * dout + s) = ch.superop(r + s * dout, a + b * din);
  return j;
}

Channel from_choi(const Mat& j, int din, int dout, Picture p) {
  if (j.rows() != din * dout || j.cols() != din * dout) throw Error(ErrorKind::DimMismatch, "Choi shape");
  Mat s(dout * dout, din * din);
  for (int a = 0; a < din; ++a)
    for (int b = 0; b < din; ++b)
      for (int r = 0; r < dout; ++r)
        for (int c = 0; c < dout; ++c) s(r + c * dout, a + b * din) = j(a * dout + r, b * dout + c);
  return Channel(din, dout, std::move(s), p);
}

std::vector<Mat> to_kraus(const Channel& ch, const Tolerances& tol) {
  Mat j = to_choi(ch);
  double scale = std::max(1.0, operator_norm(j));
  Tolerances t = tol;
  t.eq_tol = std::max(tol.eq_tol, 1e-12) * scale;
  SpectralDecomposition sd;
  try {
    sd = herm_eig(j, t);
  } catch (const Error&) {
    throw Error(ErrorKind::NotCP, "Choi matrix is not Hermitian");
  }
  if (sd.values.size() && sd.values(sd.values.size() - 1) < -tol.eq_tol * scale)
    throw Error(ErrorKind::NotCP, "Choi matrix has eigenvalue " + std::to_string(sd.values.minCoeff()));
  std::vector<Mat> ks;
  double top = sd.values.size() ? sd.values(0) : 0.0;
  for (Eigen::Index k = 0; k < sd.values.size(); ++k) {
    if (!(sd.values(k) > tol.rank_rel_tol * top) || top <= 0) break;
    Vec v = std::sqrt(sd.values(k)) * sd.vectors.col(k);
    Mat kr(ch.dim_out, ch.dim_in);
    for (int i = 0; i < ch.dim_in; ++i)
      for (int r = 0; r < ch.dim_out; ++r) kr(r, i) = v(i * ch.dim_out + r);
    ks.push_back(std::move(kr));
  }
  if (ks.empty()) ks.push_back(Mat::Zero(ch.dim_out, ch.dim_in));
  return ks;
}

Stinespring to_stinespring(const Channel& ch, const Tolerances& tol) {
  auto ks = to_kraus(ch, tol);
  const int r = static_cast<int>(ks.size());
  Mat v(ch.dim_in * r, ch.dim_out);
  for (int a = 0; a < r; ++a)
    for (int k = 0; k < ch.dim_in; ++k)
      for (int h = 0; h < ch.dim_out; ++h) v(k * r + a, h) = std::conj(ks[a](h, k));
  return {v, r};
}

Mat stinespring_apply(const Stinespring& st, const Mat& x) {
  Mat xe = kron(x, Mat(Mat::Identity(st.env_dim, st.env_dim)));
  return st.v.adjoint() * xe * st.v;
}

DualChannel dual(const Channel& ch) {
  return Channel(ch.dim_out, ch.dim_in, ch.superop.adjoint(),
                 ch.picture == Picture::heisenberg ? Picture::schrodinger : Picture::heisenberg);
}

Channel hermitian_preserving_part(const Channel& ch) {
  return from_function(
      ch.dim_in, ch.dim_out, [&ch](const Mat& x) { return Mat(0.5 * (ch.apply(x) + ch.apply(x.adjoint()).adjoint())); },
      ch.picture);
}

Channel compose(const Channel& a, const Channel& b) {
  if (a.dim_in != b.dim_out) throw Error(ErrorKind::DimMismatch, "compose: inner dims differ");
  return Channel(b.dim_in, a.dim_out, a.superop * b.superop, a.picture);
}

Channel tensor_extend(const Channel& ch, int n) {
  if (n <= 0) throw Error(ErrorKind::DimMismatch, "tensor_extend needs n >= 1");
  const int din = ch.dim_in, dout = ch.dim_out;
  const int bin = n * din, bout = n * dout;
  Mat s = Mat::Zero(static_cast<Eigen::Index>(bout) * bout, static_cast<Eigen::Index>(bin) * bin);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < din; ++i)
        for (int j = 0; j < din; ++j)
          for (int r = 0; r < dout; ++r)
            for (int c = 0; c < dout; ++c)
              s((a * dout + r) + (b * dout + c) * bout, (a * din + i) + (b * din + j) * bin) =
                  ch.superop(r + c * dout, i + j * din);
  return Channel(bin, bout, std::move(s), ch.picture);
}

ValidityFlags validate(const Channel& ch, double tol) {
  ValidityFlags f;
  Mat j = to_choi(ch);
  Mat jh = hermitian_part(j);
  double scale = std::max(1.0, operator_norm(j));
  Eigen::SelfAdjointEigenSolver<Mat> es(jh, Eigen::EigenvaluesOnly);
  f.choi_min_eig = es.eigenvalues()(0);
  f.cp = (j - j.adjoint()).norm() <= tol * scale && f.choi_min_eig >= -tol * scale;
  Mat in_id = Mat::Identity(ch.dim_in, ch.dim_in);
  Mat out_id = Mat::Identity(ch.dim_out, ch.dim_out);
  f.unital_residual = operator_norm(ch.apply(in_id) - out_id);
  f.tp_residual = operator_norm(dual(ch).apply(out_id) - in_id);
  f.unital = f.unital_residual <= tol;
  f.trace_preserving = f.tp_residual <= tol;
  return f;
}

Channel identity_channel(int d) {
  return Channel(d, d, Mat::Identity(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d));
}

Channel depolarizing_channel(int d) {
  return from_function(d, d, [d](const Mat& x) { return Mat(x.trace() / double(d) * Mat::Identity(d, d)); });
}

Channel pinching_channel(const std::vector<int>& blocks) {
  int d = 0;
  for (int b : blocks) d += b;
  std::vector<Mat> ks;
  int off = 0;
  for (int b : blocks) {
    Mat p = Mat::Zero(d, d);
    p.block(off, off, b, b).setIdentity();
    ks.push_back(p);
    off += b;
  }
  return from_kraus(ks);
}

ExampleParams example_params(double eta) {
  ExampleParams p;
  double off = std::sqrt(eta * (1.0 - eta));
  p.gamma0 = Mat(2, 2);
  p.gamma0 << 1.0 - eta, off, off, eta;
  p.gamma1 = Mat::Zero(2, 2);
  p.gamma1(1, 1) = 1.0;
  p.gamma_tilde = (p.gamma0 - eta * p.gamma1) / (1.0 - eta);
  return p;
}

Channel example_channel(double eta) {
  auto p = example_params(eta);
  return from_function(2, 2, [p](const Mat& x) {
    Mat y = Mat::Zero(2, 2);
    y(0, 0) = (p.gamma0 * x).trace();
    y(1, 1) = (p.gamma1 * x).trace();
    return y;
  });
}

Channel example_idempotent_closed_form(double eta) {
  auto p = example_params(eta);
  return from_function(2, 2, [p](const Mat& x) {
    Mat y = Mat::Zero(2, 2);
    y(0, 0) = (p.gamma_tilde * x).trace();
    y(1, 1) = (p.gamma1 * x).trace();
    return y;
  });
}

Mat carrier(const Channel& ch, const Tolerances& tol) {
  Mat rho0 = Mat::Identity(ch.dim_out, ch.dim_out) / double(ch.dim_out);
  Mat sigma = hermitian_part(dual(ch).apply(rho0));
  Tolerances t = tol;
  t.eq_tol = 1e-6;
  auto sd = herm_eig(sigma, t);
  double top = sd.values(0);
  int m = 0;
  while (m < sd.values.size() && sd.values(m) > tol.rank_rel_tol * top) ++m;
  return sd.vectors.leftCols(m);
}

Mat complement(const Mat& j) {
  const auto d = j.rows();
  Mat proj = Mat::Identity(d, d) - j * j.adjoint();
  if (j.cols() == d) return Mat(d, 0);
  return column_space_abs(proj, 0.5);
}

Channel gen_random_ucp(int dim, int kraus_rank, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Mat> ks;
  Mat g = Mat::Zero(dim, dim);
  for (int a = 0; a < kraus_rank; ++a) {
    ks.push_back(random_gaussian(dim, dim, rng));
    g += ks.back() * ks.back().adjoint();
  }
  Mat inv = matrix_sqrt_inv_sqrt(g).inv_sqrt;
  for (auto& k : ks) k = inv * k;
  return from_kraus(ks);
}

Channel gen_perturbed(const Channel& ch, double t, std::uint64_t seed) {
  if (t < 0.0 || t > 1.0) throw Error(ErrorKind::BadSpec, "perturbation weight outside [0,1]");
  if (t == 0.0) return ch;
  if (ch.dim_in != ch.dim_out) throw Error(ErrorKind::DimMismatch, "perturbation needs a square map");
  Channel psi = gen_random_ucp(ch.dim_in, ch.dim_in, seed);
  return Channel(ch.dim_in, ch.dim_out, (1.0 - t) * ch.superop + t * psi.superop, ch.picture);
}

}  // namespace aiq
