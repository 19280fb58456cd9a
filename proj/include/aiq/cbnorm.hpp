#pragma once

#include <cstdint>
#include <vector>

#include "aiq/channels.hpp"

namespace aiq {

struct SdpEntry {
  int block;
  int row;
  int col;
  cplx value;
};

/// min Σ_b Re⟨C_b, X_b⟩  s.t.  Re⟨A_i, X⟩ = b_i, X ⪰ 0 (block diagonal, Hermitian blocks).
/// Dual: max bᵀy s.t. S = C − Σ y_i A_i ⪰ 0. Each A_i is listed entrywise, both triangles.
struct SdpProblem {
  std::vector<int> blocks;
  std::vector<Mat> c;
  std::vector<std::vector<SdpEntry>> a;
  RVec b;
};

struct SdpOptions {
  double tol = 1e-10;
  int max_iter = 80;
  double step_fraction = 0.98;
};

struct SdpResult {
  std::vector<Mat> x, s;
  RVec y;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double gap = 0.0;
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Infeasible-start primal-dual path following (HKM direction, Mehrotra predictor-corrector).
/// Throws Infeasible when the iterates diverge; returns converged = false on stalls.
SdpResult solve_sdp(const SdpProblem& p, const SdpOptions& opt = {});

struct NormCertificate {
  double value = 0.0;
  double upper = 0.0;
  double lower = 0.0;
  int iterations = 0;
  double gap = 0.0;
  bool stalled = false;
};

/// max over inputs ρ on C^n ⊗ C^din of ‖(1⊗Ψ)(ρ)‖₁ for a trace-side map Ψ, with a certified interval.
NormCertificate diamond_norm(const Channel& psi, const SdpOptions& opt = {});

/// ‖Λ‖_cb for a Heisenberg map, via the diamond norm of its adjoint.
NormCertificate cb_norm(const Channel& lambda, const SdpOptions& opt = {});

/// ‖(√ρ0⊗1) J (√ρ1⊗1)‖₁, a lower bound on the diamond norm for any densities ρ0, ρ1.
double diamond_value_at(const Mat& choi, int din, int dout, const Mat& rho0, const Mat& rho1);

/// Alternating maximization over pure inputs and unitary dual witnesses.
double diamond_lower_bound_seesaw(const Channel& psi, int restarts = 20, std::uint64_t seed = 1);

/// max over sampled unitaries X on C^n ⊗ C^din of ‖(1_n ⊗ Λ)(X)‖, plus a few ascent steps.
double cb_lower_bound_sampled(const Channel& lambda, int n, int samples, std::uint64_t seed);

}  // namespace aiq
