#include <gtest/gtest.h>

#include "aiq/factorization.hpp"
#include "aiq/idempotent.hpp"

using namespace aiq;

namespace {

struct Pipeline {
  Channel phi, phi_tilde;
  EpsilonAlgebra a;
  Reconstruction rec;
};

Pipeline run(const Channel& phi) {
  Pipeline p;
  p.phi = phi;
  p.phi_tilde = idempotentize(phi).phi;
  p.a = extract_algebra(p.phi_tilde);
  p.rec = reconstruct(p.a);
  return p;
}

double super_dist(const Channel& x, const Channel& y) { return operator_norm(x.superop - y.superop); }

double eta_of(const Channel& phi) { return cb_norm(compose(phi, phi) - phi).value; }

}  // namespace

TEST(RawFactor, ExactPinchingIsAnEmbedding) {
  auto p = run(pinching_channel({2, 1}));
  ASSERT_EQ(p.rec.spec, (BlockSpec{{2, 1}}));
  auto r = raw_factor(p.rec.v, p.a, p.phi_tilde);
  EXPECT_LE(r.factor_identity, 1e-8);
  EXPECT_LE(r.retract_identity, 1e-8);
  EXPECT_LE(r.unit_defect, 1e-8);
  // a unital *-homomorphism into the block-diagonal matrices of C^3
  Rng rng(1);
  const BlockSpec& s = p.rec.spec;
  Channel pb = block_identity(s);
  for (int t = 0; t < 5; ++t) {
    Mat x = pb.apply(random_gaussian(3, 3, rng)), y = pb.apply(random_gaussian(3, 3, rng));
    Mat dx = r.delta_tilde.apply(x), dy = r.delta_tilde.apply(y);
    EXPECT_LE(operator_norm(r.delta_tilde.apply(x * y) - dx * dy), 1e-8);
    EXPECT_LE(operator_norm(r.delta_tilde.apply(x.adjoint()) - dx.adjoint()), 1e-8);
    EXPECT_LE(operator_norm(dx - p.phi.apply(dx)), 1e-8);
  }
}

TEST(RawFactor, IdentityChannelIsInvertible) {
  auto p = run(identity_channel(2));
  auto r = raw_factor(p.rec.v, p.a, p.phi_tilde);
  EXPECT_LE(super_dist(compose(r.delta_tilde, r.upsilon_tilde), identity_channel(2)), 1e-8);
  EXPECT_LE(super_dist(compose(r.upsilon_tilde, r.delta_tilde), identity_channel(2)), 1e-8);
}

TEST(RawFactor, RejectsNonSquare) {
  auto p = run(pinching_channel({1, 1}));
  AlmostHom v = p.rec.v;
  v.spec = BlockSpec{{1}};
  v.coeffs = v.coeffs.leftCols(1).eval();
  try {
    raw_factor(v, p.a, p.phi_tilde);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotBijective);
  }
}

TEST(RawFactor, PerturbedUnitDefectTracksEta) {
  auto p = run(gen_perturbed(pinching_channel({2, 1}), 1e-2, 3));
  auto r = raw_factor(p.rec.v, p.a, p.phi_tilde);
  EXPECT_LE(r.unit_defect, 100 * eta_of(p.phi));
  EXPECT_LE(r.factor_identity, 1e-8);
  EXPECT_LE(r.retract_identity, 1e-8);
}

TEST(Twirl, ExactIdempotentLeavesDeltaUnchanged) {
  auto p = run(gen_random_idempotent({{2, 1}, {1, 2}}, 5, 4));
  auto r = raw_factor(p.rec.v, p.a, p.phi_tilde);
  TwirlReport rep;
  Channel d = twirl_to_cp(r.delta_tilde, p.phi, p.rec.spec, 10000, &rep);
  EXPECT_FALSE(rep.standard_diagonal);
  EXPECT_LE(super_dist(d, r.delta_tilde), 1e-8);
  EXPECT_LE(rep.unit_deviation, 1e-8);
  EXPECT_GE(rep.choi_min_eig, -1e-10);
}

TEST(Twirl, MatrixUnitDiagonalAgreesWithPauli) {
  auto p = run(gen_perturbed(pinching_channel({2, 1}), 1e-2, 5));
  auto r = raw_factor(p.rec.v, p.a, p.phi_tilde);
  TwirlReport rp, rs;
  Channel dp = twirl_to_cp(r.delta_tilde, p.phi, p.rec.spec, 10000, &rp);
  Channel ds = twirl_to_cp(r.delta_tilde, p.phi, p.rec.spec, 1, &rs);
  EXPECT_EQ(rp.terms, 8u);
  EXPECT_TRUE(rs.standard_diagonal);
  EXPECT_EQ(rs.terms, 5u);
  // both diagonals satisfy the same identity, so the twirled maps coincide
  EXPECT_LE(super_dist(dp, ds), 1e-10);
  EXPECT_GE(rs.choi_min_eig, -1e-10);
}

TEST(Twirl, ExampleChannelIsCompletelyPositive) {
  auto p = run(example_channel(0.04));
  ASSERT_EQ(p.rec.spec, (BlockSpec{{1, 1}}));
  auto r = raw_factor(p.rec.v, p.a, p.phi_tilde);
  TwirlReport rep;
  Channel d = twirl_to_cp(r.delta_tilde, p.phi, p.rec.spec, 10000, &rep);
  EXPECT_GE(rep.choi_min_eig, -1e-10);
  auto f = validate(d, 1e-10);
  EXPECT_TRUE(f.cp);
  EXPECT_TRUE(f.unital);
  EXPECT_LE(cb_norm(d - r.delta_tilde).upper, 100 * 0.04);
}

TEST(Upsilon, ExactPinchingRetracts) {
  auto p = run(pinching_channel({3, 2, 1}));
  auto r = raw_factor(p.rec.v, p.a, p.phi_tilde);
  Channel d = twirl_to_cp(r.delta_tilde, p.phi, p.rec.spec);
  UpsilonReport rep;
  Channel u = build_upsilon(d, p.phi, p.rec.spec, {}, &rep);
  EXPECT_LE(super_dist(compose(u, d), block_identity(p.rec.spec)), 1e-8);
  EXPECT_LE(super_dist(compose(d, u), p.phi), 1e-8);
  for (size_t l = 0; l < rep.cj_norm.size(); ++l) {
    EXPECT_LE(rep.rj_residual[l], 1e-10);
    EXPECT_NEAR(rep.cj_norm[l], 1.0, 1e-8);
  }
}

TEST(Upsilon, TrivialAlgebraGivesAState) {
  auto p = run(depolarizing_channel(3));
  ASSERT_EQ(p.rec.spec, (BlockSpec{{1}}));
  auto r = raw_factor(p.rec.v, p.a, p.phi_tilde);
  Channel d = twirl_to_cp(r.delta_tilde, p.phi, p.rec.spec);
  Channel u = build_upsilon(d, p.phi, p.rec.spec);
  Mat rho = dual(u).apply(identity(1));
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
  EXPECT_GE(herm_eig(hermitian_part(rho)).values.minCoeff(), -1e-12);
  Rng rng(2);
  Mat x = random_gaussian(3, 3, rng);
  EXPECT_NEAR(std::abs(u.apply(x)(0, 0) - (rho * x).trace()), 0.0, 1e-10);
  EXPECT_LE(super_dist(compose(u, d), identity_channel(1)), 1e-10);
}

TEST(Certify, ExactIdempotent) {
  auto p = run(gen_random_idempotent({{2, 2}, {1, 3}}, 7, 6));
  auto f = factorize(p.phi, p.phi_tilde, p.a, p.rec.v);
  EXPECT_TRUE(f.cert.ucp());
  EXPECT_LE(f.cert.residual_factor.upper, 1e-6);
  EXPECT_LE(f.cert.residual_retract.upper, 1e-6);
  for (double r : f.cert.product_residual) EXPECT_LE(r, 1e-8);
  EXPECT_LE(f.delta_shift.upper, 1e-6);
}

TEST(Certify, IdentityChannel) {
  auto p = run(identity_channel(3));
  auto f = factorize(p.phi, p.phi_tilde, p.a, p.rec.v);
  EXPECT_TRUE(f.cert.ucp());
  EXPECT_LE(f.cert.residual_factor.upper, 1e-6);
  EXPECT_LE(f.cert.residual_retract.upper, 1e-6);
}

TEST(Certify, PerturbedPinchingScalesWithEta) {
  std::vector<double> eta, fac, ret;
  for (double t : {1e-3, 1e-2}) {
    auto p = run(gen_perturbed(pinching_channel({2, 1}), t, 7));
    ASSERT_EQ(p.rec.spec, (BlockSpec{{2, 1}}));
    auto f = factorize(p.phi, p.phi_tilde, p.a, p.rec.v);
    EXPECT_TRUE(f.cert.ucp());
    eta.push_back(eta_of(p.phi));
    fac.push_back(f.cert.residual_factor.upper);
    ret.push_back(f.cert.residual_retract.upper);
    EXPECT_LE(ret.back(), 100 * eta.back());
    EXPECT_LE(fac.back(), 100 * eta.back());
    EXPECT_LE(f.cert.product_residual[1], 100 * eta.back());
  }
  const double er = eta[1] / eta[0];
  EXPECT_GE(fac[1] / fac[0], er / 5);
  EXPECT_LE(fac[1] / fac[0], er * 5);
  EXPECT_GE(ret[1] / ret[0], er / 5);
  EXPECT_LE(ret[1] / ret[0], er * 5);
}
