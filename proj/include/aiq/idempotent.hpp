#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "aiq/channels.hpp"

namespace aiq {

std::vector<int> block_offsets(const std::vector<int>& dims);

/// Block data of a finite-dimensional *-algebra acting on C^m:
/// W_j maps C^m onto L_j ⊗ E_j (row index l·e_j + f) and the algebra is ⊕ M_{d_j} ⊗ 1_{e_j}.
struct BlockDecomposition {
  std::vector<int> d, e;
  std::vector<Mat> w;

  Mat unitary() const {
    if (w.empty()) return Mat();
    Eigen::Index rows = 0;
    for (const auto& x : w) rows += x.rows();
    Mat u(rows, w[0].cols());
    Eigen::Index r = 0;
    for (const auto& x : w) {
      u.middleRows(r, x.rows()) = x;
      r += x.rows();
    }
    return u;
  }
};

/// Numerical Artin–Wedderburn splitting of a *-closed unital algebra of m×m matrices.
BlockDecomposition decompose_star_algebra(const std::vector<Mat>& basis, double struct_tol = 1e-8,
                                                 std::uint64_t seed = 0x5eedULL);

// ------------------------------------------------------------------------

/// Structure of an exactly idempotent UCP map: carrier M, blocks (d_j, e_j), W_j, γ_j.
struct IdempotentStructure {
  Mat carrier;  // J_M : M -> H
  std::vector<int> d, e;
  std::vector<Mat> w;
  std::vector<Mat> gamma;
  Channel phi;
  double residual = 0.0;

  int block_total() const { return std::accumulate(d.begin(), d.end(), 0); }
  int carrier_dim() const { return static_cast<int>(carrier.cols()); }
  int ambient_dim() const { return static_cast<int>(carrier.rows()); }
};

/// Σ_j W_j†(X_j ⊗ 1)W_j for a block-diagonal X on C^{Σd}.
Mat structure_w(const IdempotentStructure& s, const Mat& x);

/// ⊕_j Tr_E(W_j Y W_j† (1 ⊗ γ_j)) for Y on the carrier.
Mat structure_gamma(const IdempotentStructure& s, const Mat& y);

/// Δ as a Heisenberg map on B(C^{Σd}) (off-block entries ignored): X -> Φ(J w(X) J†).
Channel structure_delta(const IdempotentStructure& s);

/// Γ∘C_M as a Heisenberg map B(H) -> B(C^{Σd}).
Channel structure_gamma_cm(const IdempotentStructure& s);

IdempotentStructure idempotent_structure(const Channel& ch, double struct_tol = 1e-8,
                                                const Tolerances& tol = {}, std::uint64_t seed = 0x5eedULL);

/// Enc : B* -> B(H)* and Dec : B(H)* -> B*, B* concretized as block-diagonal states on C^{Σd}.
/// `tail` is the out-of-code decoder on B(M⊥)*; by default it prepares |0><0| in block 1.
std::pair<DualChannel, DualChannel> make_enc_dec(const IdempotentStructure& s,
                                                        const std::optional<Channel>& tail = std::nullopt);

/// Out-of-code decoder read off from Φ itself, so that Enc∘Dec reproduces Φ* exactly.
Channel out_of_code_decoder(const IdempotentStructure& s);

/// Exact idempotent UCP map on C^dim with blocks ⊕ M_{d_j} ⊗ 1_{e_j} on a random carrier,
/// random γ_j and a random UCP tail on the complement of the carrier.
Channel gen_random_idempotent(const std::vector<std::pair<int, int>>& blocks, int dim, std::uint64_t seed);

}  // namespace aiq
