#pragma once

#include <cstdint>
#include <vector>

#include "aiq/starcalc.hpp"

namespace aiq {

/// Hermitian P in A with ‖P⋆P − P‖ = delta.
struct DeltaProjection {
  Vec coords;
  double delta = 0.0;
  double norm = 0.0;
};

/// Measures δ and ‖P‖ for the given (real) coordinates.
DeltaProjection make_projection(const EpsilonAlgebra& a, const Vec& coords);

/// P ← 3P⋆P − 2P⋆(P⋆P) until δ stops dropping by 1% per step.
DeltaProjection refine_projection(const EpsilonAlgebra& a, const Vec& coords, int max_iter = 60);

/// Idempotent on algebra coordinates carving out S_{P,Q} ≈ P A Q.
struct CompressionMap {
  DeltaProjection p, q;
  Mat matrix;       // N × N
  Mat image;        // N × k, orthonormal columns spanning S_{P,Q}
  double lr_distance = 0.0;  // ‖L_P R_Q − C‖

  int dim() const { return static_cast<int>(image.cols()); }
  Vec apply(const Vec& x) const { return matrix * x; }
};

CompressionMap compression(const EpsilonAlgebra& a, const DeltaProjection& p, const DeltaProjection& q,
                           const Tolerances& tol = {});

/// C_{P,R}(X ⋆ Y) for X ∈ S_{P,Q}, Y ∈ S_{Q,R}.
Vec compressed_product(const EpsilonAlgebra& a, const CompressionMap& c_pq, const CompressionMap& c_qr,
                       const CompressionMap& c_pr, const Vec& x, const Vec& y, double membership_tol = 1e-8);

/// S_P as an ε-algebra of its own, with product C_P(X ⋆ Y).
struct Corner {
  EpsilonAlgebra alg;
  Mat embed;  // N × k: corner coordinates -> coordinates in A
};

Corner compress_algebra(const EpsilonAlgebra& a, const CompressionMap& c_pp);

/// Searches for P with ‖P⋆P − P‖ ≤ delta_target and min(‖P‖, ‖1 − P‖) ≥ 1/2.
DeltaProjection find_nontrivial_projection(const EpsilonAlgebra& a, double delta_target, int max_retries,
                                           std::uint64_t seed);

/// Inner product on S_{P,Q} for one-dimensional Q: C_Q(Y† ⋆ X) = ⟨Y|X⟩ Q̃.
struct SubspaceHilbert {
  CompressionMap c_pq, c_q;
  Vec q_tilde;
  Mat gram;      // in the orthonormal coordinate basis `c_pq.image`
  Mat onb;       // k × k, columns are Gram-orthonormal vectors in that basis
  double min_gram_eig = 0.0;

  /// Algebra coordinates of the j-th Gram-orthonormal vector.
  Vec element(int j) const { return c_pq.image * onb.col(j); }
};

/// ⟨Y|X⟩ for Y, X ∈ S_{P,Q}.
cplx inner_product(const EpsilonAlgebra& a, const CompressionMap& c_q, const Vec& q_tilde, const Vec& y,
                   const Vec& x);

SubspaceHilbert hilbert_structure(const EpsilonAlgebra& a, const CompressionMap& c_pq, const CompressionMap& c_q);

/// H(Z) : S_{R,Q} -> S_{P,Q} for Z ∈ S_{P,R}, as a matrix between Gram-orthonormal bases, from
/// 2⟨Y|H(Z)X⟩ = ⟨(Y†·Z)·X⟩ + ⟨Y†·(Z·X)⟩.
Mat h_map(const EpsilonAlgebra& a, const SubspaceHilbert& s_pq, const SubspaceHilbert& s_rq,
          const CompressionMap& c_pr, const Vec& z);

/// Classes of mutually equivalent one-dimensional projections; ranks in [gray_lo, gray_hi] raise AmbiguousRank.
std::vector<std::vector<int>> classify_equivalence(const EpsilonAlgebra& a, const std::vector<DeltaProjection>& ps,
                                                   double gray_lo = 0.1, double gray_hi = 0.9);

}  // namespace aiq
