#include <gtest/gtest.h>

#include "aiq/channels.hpp"
#include "aiq/numlin.hpp"

using namespace aiq;

namespace {

Mat pauli_x() {
  Mat x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST(HermEig, DiagonalInput) {
  auto sd = herm_eig(diag2(1, 3));
  EXPECT_NEAR(sd.values(0), 3, 1e-14);
  EXPECT_NEAR(sd.values(1), 1, 1e-14);
  EXPECT_NEAR(std::abs(sd.vectors(1, 0)), 1, 1e-14);
}

TEST(HermEig, PauliX) {
  auto sd = herm_eig(pauli_x());
  EXPECT_NEAR(sd.values(0), 1, 1e-14);
  EXPECT_NEAR(sd.values(1), -1, 1e-14);
  EXPECT_NEAR(std::abs(sd.vectors(0, 0) - sd.vectors(1, 0)), 0, 1e-14);
  EXPECT_NEAR(std::abs(sd.vectors(0, 1) + sd.vectors(1, 1)), 0, 1e-14);
}

TEST(HermEig, PureStateOfExample) {
  auto p = example_params(0.04);
  auto sd = herm_eig(p.gamma0);
  EXPECT_NEAR(sd.values(0), 1, 1e-14);
  EXPECT_NEAR(sd.values(1), 0, 1e-14);
}

TEST(HermEig, RejectsNonHermitian) {
  Mat m(2, 2);
  m << 0, 1, 0, 0;
  try {
    herm_eig(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHermitian);
  }
}

TEST(HermEig, ReconstructsRandom) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    Mat h = random_hermitian(6, rng);
    auto sd = herm_eig(h);
    Mat back = sd.vectors * sd.values.cast<cplx>().asDiagonal() * sd.vectors.adjoint();
    EXPECT_LE(operator_norm(back - h), 1e-12 * std::max(1.0, operator_norm(h)));
    EXPECT_LE(operator_norm(sd.vectors.adjoint() * sd.vectors - identity(6)), 1e-12);
    for (int i = 1; i < 6; ++i) EXPECT_GE(sd.values(i - 1), sd.values(i));
  }
}

TEST(SqrtInvSqrt, Diagonal) {
  auto r = matrix_sqrt_inv_sqrt(diag2(4, 9));
  EXPECT_LE(operator_norm(r.sqrt - diag2(2, 3)), 1e-14);
  EXPECT_LE(operator_norm(r.inv_sqrt - diag2(0.5, 1.0 / 3)), 1e-14);
  auto i = matrix_sqrt_inv_sqrt(identity(3));
  EXPECT_LE(operator_norm(i.sqrt - identity(3)), 1e-14);
  EXPECT_LE(operator_norm(i.inv_sqrt - identity(3)), 1e-14);
}

TEST(SqrtInvSqrt, FrozenOracle) {
  Mat a(2, 2);
  a << 4, 1, 1, 3;
  Mat expect(2, 2);
  expect << 1.98157763, 0.27083221, 0.27083221, 1.71074543;
  auto r = matrix_sqrt_inv_sqrt(a);
  EXPECT_LE(operator_norm(r.sqrt - expect), 1e-8);
  EXPECT_LE(operator_norm(r.sqrt * r.sqrt - a), 1e-10 * 5);
  EXPECT_LE(operator_norm(r.sqrt * r.inv_sqrt - identity(2)), 1e-10);
}

TEST(SqrtInvSqrt, RejectsSingular) {
  try {
    matrix_sqrt_inv_sqrt(diag2(1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPositive);
  }
}

TEST(MatrixSign, Diagonal) {
  EXPECT_LE(operator_norm(matrix_sign(diag2(3, -2)) - diag2(1, -1)), 1e-14);
  EXPECT_LE(operator_norm(theta(diag2(3, -2)) - diag2(1, 0)), 1e-14);
}

TEST(MatrixSign, NearIdentityIsIdentity) {
  Mat m = identity(2) + 0.1 * pauli_x();
  Mat s = matrix_sign(m);
  EXPECT_LE(operator_norm(s - identity(2)), 1e-12);
}

TEST(MatrixSign, FixedPointProjection) {
  Mat p = Mat::Zero(3, 3);
  p(0, 0) = 1;
  EXPECT_LE(operator_norm(theta(2 * p - identity(3)) - p), 1e-14);
}

TEST(MatrixSign, FrozenNonHermitianOracle) {
  Mat m(3, 3);
  m << 2, cplx(0, 1), 0, 0.5, -1, 0.3, 0, cplx(0.2, -0.1), 1.5;
  Mat expect(3, 3);
  expect << cplx(0.98430226, -0.1057793), cplx(0.06315013, 0.64601225), cplx(-0.01201945, -0.0758495),
      cplx(0.32300613, -0.03157506), cplx(-0.96770245, 0.09365992), cplx(0.23172843, -0.02495476),
      cplx(-0.02327992, 0.01664807), cplx(0.14616736, -0.09387932), cplx(0.98340018, 0.01211938);
  Mat s = matrix_sign(m);
  EXPECT_LE(operator_norm(s - expect), 1e-7);
}

TEST(MatrixSign, SingularIterate) {
  try {
    matrix_sign(diag2(1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.kind() == ErrorKind::SingularIterate || e.kind() == ErrorKind::NoConvergence);
  }
}

TEST(MatrixSign, RandomAdmissibleHermitian) {
  Rng rng(11);
  for (int t = 0; t < 500; ++t) {
    int n = 2 + t % 7;
    // eigenvalues ±sqrt(1+s) with |s| ≤ 0.9 keep ‖M²−I‖ ≤ 0.9
    RVec lam = random_real(n, rng);
    Mat u = random_unitary(n, rng);
    Mat d = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      double s = 0.9 * std::tanh(lam(i));
      d(i, i) = (i % 2 ? -1.0 : 1.0) * std::sqrt(1 + s);
    }
    Mat m = u * d * u.adjoint();
    ASSERT_LE(operator_norm(m * m - identity(n)), 0.9 + 1e-12);
    Mat s = matrix_sign(m);
    EXPECT_LE(operator_norm(s * s - identity(n)), 1e-9);
    EXPECT_LE(operator_norm(s * m - m * s), 1e-9 * operator_norm(m));
    Mat th = theta(m);
    EXPECT_LE(operator_norm(th * th - th), 1e-9);
  }
}

TEST(Theta, NearProjectionBound) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Mat u = random_unitary(5, rng);
    Mat d = Mat::Zero(5, 5);
    d(0, 0) = d(1, 1) = 1;
    Mat p = u * d * u.adjoint();
    Mat h = random_hermitian(5, rng);
    h *= 0.05 / operator_norm(h);
    Mat q = p + h;
    double delta = operator_norm(q * q - q);
    Mat pt = theta(2 * q - identity(5));
    EXPECT_LE(operator_norm(pt * pt - pt), 1e-12);
    EXPECT_LE(operator_norm(pt - q), 2 * operator_norm(2 * q - identity(5)) * delta);
    EXPECT_LE(operator_norm(pt * q - q * pt), 1e-12);
  }
}

TEST(Tensor, KronIdentity) {
  EXPECT_LE(operator_norm(kron(identity(2), identity(3)) - identity(6)), 0);
}

TEST(Tensor, PartialTraceOfProductState) {
  Mat z = Mat::Zero(4, 4);
  z(0, 0) = 1;
  Mat r = partial_trace(z, {2, 2}, {1});
  EXPECT_LE(operator_norm(r - diag2(1, 0)), 0);
  Mat r0 = partial_trace(z, {2, 2}, {0});
  EXPECT_LE(operator_norm(r0 - diag2(1, 0)), 0);
}

TEST(Tensor, PartialTraceAgainstLoops) {
  Rng rng(5);
  Mat m = random_gaussian(6, 6, rng);
  Mat a = ptrace_second(m, 2, 3), b = ptrace_first(m, 2, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      cplx s = 0;
      for (int k = 0; k < 3; ++k) s += m(i * 3 + k, j * 3 + k);
      EXPECT_NEAR(std::abs(a(i, j) - s), 0, 1e-14);
    }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      cplx s = 0;
      for (int k = 0; k < 2; ++k) s += m(k * 3 + i, k * 3 + j);
      EXPECT_NEAR(std::abs(b(i, j) - s), 0, 1e-14);
    }
  Mat c = random_gaussian(24, 24, rng);
  Mat mid = partial_trace(c, {2, 3, 4}, {0, 2});
  EXPECT_NEAR(std::abs(mid.trace() - c.trace()), 0, 1e-12);
}

TEST(Tensor, VecKronIdentity) {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    Mat a = random_gaussian(3, 4, rng), x = random_gaussian(4, 2, rng), b = random_gaussian(2, 5, rng);
    Vec lhs = vec(a * x * b);
    Vec rhs = kron(Mat(b.transpose()), a) * vec(x);
    EXPECT_LE((lhs - rhs).norm(), 1e-12);
    EXPECT_LE(operator_norm(unvec(vec(x), 4, 2) - x), 0);
  }
}

TEST(Tensor, TransposePermutation) {
  Rng rng(1);
  Mat x = random_gaussian(3, 3, rng);
  Mat k = transpose_permutation(3);
  EXPECT_LE((k * vec(x) - vec(Mat(x.transpose()))).norm(), 0);
}

TEST(Tensor, DepolarizingStinespringMarginal) {
  auto st = to_stinespring(depolarizing_channel(2));
  EXPECT_EQ(st.env_dim, 4);
  EXPECT_LE(operator_norm(st.v.adjoint() * st.v - identity(2)), 1e-12);
  Mat marg = ptrace_second(st.v * st.v.adjoint(), 2, st.env_dim);
  Mat brute = Mat::Zero(2, 2);
  for (const auto& k : to_kraus(depolarizing_channel(2))) brute += k.adjoint() * k;
  EXPECT_LE(operator_norm(marg - brute), 1e-12);
  EXPECT_LE(operator_norm(marg - identity(2)), 1e-12);
}

TEST(Norms, Basics) {
  EXPECT_NEAR(operator_norm(diag2(2, -5)), 5, 1e-14);
  EXPECT_NEAR(operator_norm(pauli_x()), 1, 1e-14);
  EXPECT_NEAR(trace_norm(diag2(2, -5)), 7, 1e-14);
  EXPECT_NEAR(std::abs(hs_inner(pauli_x(), identity(2))), 0, 0);
  Mat a(2, 2);
  a << cplx(0, 1), 0, 0, 0;
  EXPECT_NEAR(std::abs(hs_inner(a, a) - cplx(1, 0)), 0, 1e-15);
}

TEST(Norms, ExampleGammaDifference) {
  for (double eta : {0.01, 0.04, 0.1}) {
    auto p = example_params(eta);
    auto sd = herm_eig(p.gamma0 - p.gamma1);
    double expect = std::max(std::abs(sd.values(0)), std::abs(sd.values(1)));
    EXPECT_NEAR(operator_norm(p.gamma0 - p.gamma1), expect, 1e-14);
    // Tr = 0 and det = −(1−η) give eigenvalues ±√(1−η)
    EXPECT_NEAR(expect, std::sqrt(1 - eta), 1e-14);
  }
  EXPECT_NEAR(operator_norm(example_params(0.04).gamma0 - example_params(0.04).gamma1), 0.9797958971132713, 1e-14);
}
