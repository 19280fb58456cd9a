#pragma once

#include <cstdint>
#include <vector>

#include "aiq/cbnorm.hpp"
#include "aiq/reconstruction.hpp"

namespace aiq {

// B = ⊕ M_{d_l} is concretized as block-diagonal matrices on C^{Σd}. Maps out of B ignore
// off-block entries; maps into B return block-diagonal matrices.

/// X ∈ B(C^{Σd}) -> its block-diagonal part (the identity of B).
Channel block_identity(const BlockSpec& spec);

struct RawFactor {
  Channel delta_tilde;    // B -> B(H), inclusion ∘ v
  Channel upsilon_tilde;  // B(H) -> B, v⁻¹ ∘ Φ̃
  double factor_identity = 0.0;   // ‖Δ̃Υ̃ − Φ̃‖ on superoperators
  double retract_identity = 0.0;  // ‖Υ̃Δ̃ − 1_B‖ on superoperators
  double unit_defect = 0.0;       // ‖Δ̃(I_B) − 1_H‖
};

/// NotBijective when v is not square or numerically singular.
RawFactor raw_factor(const AlmostHom& v, const EpsilonAlgebra& a, const Channel& phi_tilde);

struct TwirlReport {
  std::size_t terms = 0;
  bool standard_diagonal = false;  // Pauli terms exceeded the cap
  double choi_min_eig = 0.0;       // of Δ' before normalization, relative to its norm
  double unit_min_eig = 0.0;       // of Δ'(I_B)
  double unit_deviation = 0.0;     // ‖Δ'(I_B)^{-1/2} − 1‖
};

/// Δ'(X) = Σ_s p_s Φ(Δ̃(X U_s†) Δ̃(U_s)), then Δ = Δ'(I)^{-1/2} Δ'(·) Δ'(I)^{-1/2}.
/// Uses the Pauli diagonal when it has at most `twirl_cap` terms, else the matrix-unit diagonal
/// Σ_l d_l⁻¹ Σ_jk E_jk ⊗ E_kj, which is exact with Σ d_l² terms.
Channel twirl_to_cp(const Channel& delta_tilde, const Channel& phi, const BlockSpec& spec,
                    std::size_t twirl_cap = 10000, TwirlReport* report = nullptr);

struct UpsilonReport {
  std::vector<int> env_dims;
  std::vector<double> rj_residual;  // ‖R_j − 1 ⊗ C_j‖ / ‖R_j‖
  std::vector<double> cj_norm;
  std::vector<double> xi_gain;      // ‖C_j ξ_j‖
  double unit_min_eig = 0.0;        // of Υ'(1_H)
};

/// Υ'_j(X) = L_j†(Φ(X) ⊗ 1_F)L_j with L_j = Σ_s p_s (Δ(U_s†) ⊗ 1_F) V W_j†(U_s ⊗ ξ_j), normalized by Υ'(1)^{-1/2}.
Channel build_upsilon(const Channel& delta, const Channel& phi, const BlockSpec& spec, const Tolerances& tol = {},
                      UpsilonReport* report = nullptr);

struct FactorizationCertificate {
  BlockSpec spec;
  Channel delta_ch;
  Channel upsilon_ch;
  NormCertificate residual_factor;   // ‖ΔΥ − Φ‖_cb
  NormCertificate residual_retract;  // ‖ΥΔ − 1_B‖_cb
  ValidityFlags delta_flags;
  ValidityFlags upsilon_flags;
  std::vector<double> product_residual;  // n = 1, 2: max ‖Υ_n(Δ_n(X)Δ_n(Y)) − XY‖ / (‖X‖‖Y‖)

  bool ucp() const {
    return delta_flags.cp && delta_flags.unital && upsilon_flags.cp && upsilon_flags.unital;
  }
};

FactorizationCertificate certify(const Channel& delta, const Channel& upsilon, const Channel& phi,
                                 const BlockSpec& spec, int samples = 20, std::uint64_t seed = 1,
                                 const SdpOptions& sdp = {});

struct FactorizeOptions {
  std::size_t twirl_cap = 10000;
  int samples = 20;
  std::uint64_t seed = 1;
  Tolerances tol;
  SdpOptions sdp;
};

struct Factorization {
  RawFactor raw;
  TwirlReport twirl;
  UpsilonReport upsilon;
  NormCertificate delta_shift;  // ‖Δ − Δ̃‖_cb
  FactorizationCertificate cert;
};

/// raw_factor -> twirl_to_cp -> build_upsilon -> certify. Φ is the original UCP map.
Factorization factorize(const Channel& phi, const Channel& phi_tilde, const EpsilonAlgebra& a, const AlmostHom& v,
                        const FactorizeOptions& opt = {});

}  // namespace aiq
