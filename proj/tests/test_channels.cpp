#include <gtest/gtest.h>

#include "aiq/channels.hpp"
#include "aiq/idempotent.hpp"

using namespace aiq;

namespace {

Mat unit(int n, int i, int j) {
  Mat e = Mat::Zero(n, n);
  e(i, j) = 1;
  return e;
}

// Φ(X) = P0 Tr(γ0 X) + P1 Tr(γ1 X), straight from the definition
Mat example_brute(double eta, const Mat& x) {
  auto p = example_params(eta);
  Mat out = Mat::Zero(2, 2);
  out(0, 0) = (p.gamma0 * x).trace();
  out(1, 1) = (p.gamma1 * x).trace();
  return out;
}

double superop_dist(const Channel& a, const Channel& b) { return operator_norm(a.superop - b.superop); }

}  // namespace

TEST(Representations, IdentityChoi) {
  Mat j = to_choi(identity_channel(2));
  Mat expect = Mat::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) expect += kron(unit(2, i, k), unit(2, i, k));
  EXPECT_LE(operator_norm(j - expect), 0);
  EXPECT_EQ(to_kraus(identity_channel(2)).size(), 1u);
}

TEST(Representations, DepolarizingChoi) {
  Mat j = to_choi(depolarizing_channel(2));
  EXPECT_LE(operator_norm(j - identity(4) / 2.0), 1e-15);
  EXPECT_EQ(to_kraus(depolarizing_channel(2)).size(), 4u);
}

TEST(Representations, ExampleKrausAndStinespring) {
  Channel ch = example_channel(0.04);
  Rng rng(2);
  for (int t = 0; t < 5; ++t) {
    Mat x = random_gaussian(2, 2, rng);
    EXPECT_LE(operator_norm(ch.apply(x) - example_brute(0.04, x)), 1e-14);
  }
  EXPECT_EQ(to_kraus(ch).size(), 2u);
  auto st = to_stinespring(ch);
  EXPECT_EQ(st.env_dim, 2);
  for (int t = 0; t < 5; ++t) {
    Mat x = random_gaussian(2, 2, rng);
    EXPECT_LE(operator_norm(stinespring_apply(st, x) - ch.apply(x)), 1e-12);
  }
}

TEST(Representations, RoundTripsOnRandomChannels) {
  for (int t = 0; t < 200; ++t) {
    int d = 2 + t % 3;
    Channel ch = gen_random_ucp(d, 1 + t % 4, 1000 + t);
    Channel back = from_choi(to_choi(ch), d, d);
    EXPECT_LE(superop_dist(back, ch), 1e-10);
    Channel fk = from_kraus(to_kraus(ch));
    EXPECT_LE(superop_dist(fk, ch), 1e-10);
    auto st = to_stinespring(ch);
    EXPECT_LE(operator_norm(st.v.adjoint() * st.v - identity(d)), 1e-10);
  }
}

TEST(Representations, NotCP) {
  Channel tr = from_function(2, 2, [](const Mat& x) { return Mat(x.transpose()); });
  try {
    to_kraus(tr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotCP);
  }
  EXPECT_FALSE(validate(tr).cp);
}

TEST(Composition, DualAndCompose) {
  EXPECT_LE(superop_dist(dual(identity_channel(3)), identity_channel(3)), 0);
  Channel pin = pinching_channel({2, 1});
  EXPECT_LE(superop_dist(compose(pin, pin), pin), 1e-10);
  Channel d = dual(gen_random_ucp(3, 2, 4));
  EXPECT_TRUE(validate(d).trace_preserving);
  EXPECT_EQ(d.picture, Picture::schrodinger);
}

TEST(Composition, TensorExtend) {
  Channel ch = example_channel(0.04);
  Channel ext = tensor_extend(ch, 2);
  Rng rng(8);
  for (int t = 0; t < 4; ++t) {
    Mat x = random_gaussian(2, 2, rng);
    Mat e = unit(2, t / 2, t % 2);
    EXPECT_LE(operator_norm(ext.apply(kron(e, x)) - kron(e, ch.apply(x))), 1e-14);
  }
}

TEST(Carrier, Examples) {
  EXPECT_EQ(carrier(depolarizing_channel(3)).cols(), 3);
  EXPECT_EQ(carrier(example_channel(0.04)).cols(), 2);
  // a code on 4 dims inside C^7
  Channel code = gen_random_idempotent({{2, 1}, {1, 2}}, 7, 21);
  EXPECT_EQ(carrier(code).cols(), 4);
}

TEST(Carrier, SpanCharacterization) {
  Channel ch = gen_random_idempotent({{2, 2}}, 6, 3);
  Mat j = carrier(ch);
  Mat pi = j * j.adjoint();
  auto st = to_stinespring(ch);
  Mat off = kron(Mat(identity(6) - pi), identity(st.env_dim)) * st.v;
  EXPECT_LE(operator_norm(off), 1e-9);
  Rng rng(4);
  for (int t = 0; t < 5; ++t) {
    Mat x = random_gaussian(6, 6, rng);
    EXPECT_LE(operator_norm(ch.apply(x) - ch.apply(pi * x * pi)), 1e-10);
  }
}

TEST(UcpInequalities, RandomMaps) {
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    Channel ch = gen_random_ucp(3, 2 + t % 3, 300 + t);
    auto f = validate(ch);
    EXPECT_TRUE(f.cp);
    EXPECT_TRUE(f.unital);
    Mat x = random_gaussian(3, 3, rng);
    Mat gap = ch.apply(x.adjoint() * x) - ch.apply(x.adjoint()) * ch.apply(x);
    EXPECT_GE(herm_eig(hermitian_part(gap)).values.minCoeff(), -1e-9);
    EXPECT_LE(operator_norm(ch.apply(x)), operator_norm(x) + 1e-12);
  }
}

TEST(Generators, Perturbed) {
  Channel pin = pinching_channel({3, 2, 1});
  EXPECT_EQ((gen_perturbed(pin, 0.0, 5).superop - pin.superop).norm(), 0.0);
  Channel p = gen_perturbed(pin, 1e-2, 5);
  auto f = validate(p);
  EXPECT_TRUE(f.cp && f.unital);
  // the superoperator norm is a lower bound for η; the full cb check lives in the cbnorm tests
  EXPECT_LE(operator_norm(compose(p, p).superop - p.superop), 4e-2);
}

TEST(Generators, RandomIdempotent) {
  Channel ch = gen_random_idempotent({{2, 2}, {1, 3}}, 7, 99);
  EXPECT_LE(superop_dist(compose(ch, ch), ch), 1e-10);
  auto f = validate(ch);
  EXPECT_TRUE(f.cp && f.unital);
  EXPECT_LE(carrier(ch).cols(), 7);
}

TEST(Decompose, FullMatrixAlgebra) {
  std::vector<Mat> b;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b.push_back(unit(3, i, j));
  auto bd = decompose_star_algebra(b);
  EXPECT_EQ(bd.d, std::vector<int>({3}));
  EXPECT_EQ(bd.e, std::vector<int>({1}));
}

TEST(Decompose, Diagonal) {
  std::vector<Mat> b;
  for (int i = 0; i < 3; ++i) b.push_back(unit(3, i, i));
  auto bd = decompose_star_algebra(b);
  EXPECT_EQ(bd.d, std::vector<int>({1, 1, 1}));
  EXPECT_EQ(bd.e, std::vector<int>({1, 1, 1}));
}

TEST(Decompose, AmplifiedQubit) {
  Rng rng(6);
  Mat u = random_unitary(6, rng);
  std::vector<Mat> b;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) b.push_back(u * kron(unit(2, i, j), identity(3)) * u.adjoint());
  auto bd = decompose_star_algebra(b);
  EXPECT_EQ(bd.d, std::vector<int>({2}));
  EXPECT_EQ(bd.e, std::vector<int>({3}));
  Mat w = bd.unitary();
  EXPECT_LE(operator_norm(w * w.adjoint() - identity(6)), 1e-8);
}

TEST(Decompose, NotClosed) {
  Mat a = unit(2, 0, 1);
  try {
    decompose_star_algebra({identity(2), a});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotClosed);
  }
}

TEST(IdempotentStructure, Pinching) {
  Channel pin = pinching_channel({3, 2, 1});
  auto s = idempotent_structure(pin);
  EXPECT_EQ(s.d, std::vector<int>({3, 2, 1}));
  EXPECT_EQ(s.e, std::vector<int>({1, 1, 1}));
  EXPECT_EQ(s.carrier_dim(), 6);
  EXPECT_LE(s.residual, 1e-6);
  auto [enc, dec] = make_enc_dec(s);
  EXPECT_LE(superop_dist(compose(enc, dec), dual(pin)), 1e-10);
}

TEST(IdempotentStructure, Depolarizing) {
  auto s = idempotent_structure(depolarizing_channel(3));
  EXPECT_EQ(s.d, std::vector<int>({1}));
  EXPECT_EQ(s.e, std::vector<int>({3}));
  EXPECT_LE(operator_norm(s.gamma[0] - identity(3) / 3.0), 1e-10);
  auto [enc, dec] = make_enc_dec(s);
  Mat one = Mat::Ones(1, 1);
  EXPECT_LE(operator_norm(enc.apply(one) - identity(3) / 3.0), 1e-12);
  Rng rng(1);
  Mat rho = random_density(3, rng);
  EXPECT_NEAR(std::abs(dec.apply(rho)(0, 0) - 1.0), 0, 1e-12);
}

TEST(IdempotentStructure, RandomCodeRecoversDims) {
  Channel ch = gen_random_idempotent({{2, 2}, {1, 3}}, 7, 123);
  auto s = idempotent_structure(ch);
  EXPECT_EQ(s.d, std::vector<int>({2, 1}));
  EXPECT_EQ(s.e, std::vector<int>({2, 3}));
  EXPECT_LE(s.residual, 1e-6);
  auto [enc, dec] = make_enc_dec(s);
  Channel de = compose(dec, enc);
  // identity on the block-diagonal states
  Rng rng(2);
  Mat rho = Mat::Zero(3, 3);
  rho.block(0, 0, 2, 2) = 0.6 * random_density(2, rng);
  rho(2, 2) = 0.4;
  EXPECT_LE(operator_norm(de.apply(rho) - rho), 1e-10);
  Channel t = compose(enc, dec);
  EXPECT_LE(superop_dist(compose(t, t), t), 1e-9);
}

TEST(IdempotentStructure, CodeWithTail) {
  Channel ch = gen_random_idempotent({{2, 1}, {1, 2}}, 7, 77);
  auto s = idempotent_structure(ch);
  EXPECT_EQ(s.carrier_dim(), 4);
  auto [enc, dec] = make_enc_dec(s, out_of_code_decoder(s));
  EXPECT_LE(superop_dist(compose(enc, dec), dual(ch)), 1e-9);
}

TEST(IdempotentStructure, FixedAlgebraProperties) {
  Channel ch = gen_random_idempotent({{2, 1}, {1, 2}}, 6, 8);
  auto s = idempotent_structure(ch);
  Mat j = s.carrier;
  Mat pi = j * j.adjoint();
  Rng rng(3);
  for (int t = 0; t < 5; ++t) {
    Mat x = ch.apply(random_gaussian(6, 6, rng)), y = ch.apply(random_gaussian(6, 6, rng));
    EXPECT_LE(operator_norm(pi * x * (identity(6) - pi)), 1e-9);
    Mat lhs = j.adjoint() * ch.apply(x * y) * j;
    Mat rhs = (j.adjoint() * x * j) * (j.adjoint() * y * j);
    EXPECT_LE(operator_norm(lhs - rhs), 1e-9 * std::max(1.0, operator_norm(x) * operator_norm(y)));
  }
}

TEST(IdempotentStructure, NotIdempotent) {
  try {
    idempotent_structure(example_channel(0.04));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotIdempotent);
  }
}

TEST(EncDec, InvalidGamma) {
  auto s = idempotent_structure(depolarizing_channel(2));
  s.gamma[0](0, 0) = -0.5;
  s.gamma[0](1, 1) = 1.5;
  try {
    make_enc_dec(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidGamma);
  }
}
