#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aiq/projections.hpp"

namespace aiq {

/// Isomorphism type ⊕_l M_{d_l}. Coordinates on B use the matrix units E_jk of block l at
/// index offset_l + j + k·d_l.
struct BlockSpec {
  std::vector<int> block_dims;

  int dim() const;         // Σ d_l²
  int concrete_dim() const;  // Σ d_l
  std::vector<int> offsets() const;
  std::string to_string() const;
  bool operator==(const BlockSpec& o) const { return block_dims == o.block_dims; }
};

// -------------------------------------------------------- B = ⊕ M_{d_l}

std::vector<Mat> b_blocks(const BlockSpec& s, const Vec& x);
Vec b_from_blocks(const BlockSpec& s, const std::vector<Mat>& blocks);
Vec b_multiply(const BlockSpec& s, const Vec& x, const Vec& y);
/// Matrix of y -> x·y on B coordinates.
Mat b_left(const BlockSpec& s, const Vec& x);
Vec b_adjoint(const BlockSpec& s, const Vec& x);
Vec b_unit(const BlockSpec& s);
double b_norm(const BlockSpec& s, const Vec& x);
/// Block-diagonal matrix on C^{Σd}.
Mat b_concrete(const BlockSpec& s, const Vec& x);
/// Coordinates of the block-diagonal part of a Σd × Σd matrix.
Vec b_from_concrete(const BlockSpec& s, const Mat& m);
/// Index of E_kj given the index of E_jk.
std::vector<int> b_transpose_index(const BlockSpec& s);

// -------------------------------------------------------------- diagonal

/// Σ p_s U_s† ⊗ U_s with U_s unitaries of B given by coordinates.
struct Diagonal {
  BlockSpec spec;
  std::vector<double> weights;
  std::vector<Vec> unitaries;
};

/// Generalized Pauli operators per block, combined across m blocks with phases ω^{a·l}
/// (ω = e^{2πi/m}) so that cross-block terms cancel. m·Π d_l² terms.
Diagonal pauli_diagonal(const BlockSpec& spec, std::size_t cap = 100000);

// ------------------------------------------------------- almost homs

/// Linear v : B -> A with coeffs(:, u) the A coordinates of v(E_u).
struct AlmostHom {
  BlockSpec spec;
  Mat coeffs;  // N × dim B
  double unit_defect = 0.0;
  double mult_defect = 0.0;
  double iso_lower = 0.0;
  double iso_upper = 0.0;

  Vec apply(const Vec& x) const { return coeffs * x; }
};

struct HomDefects {
  double unit = 0.0;  // ‖v(1) − 1_A‖
  double mult = 0.0;  // max ‖v(XY) − v(X)⋆v(Y)‖ / (‖X‖‖Y‖)
};

/// All matrix-unit pairs plus `samples` random pairs.
HomDefects mult_defect(const AlmostHom& v, const EpsilonAlgebra& a, int samples = 20, std::uint64_t seed = 1);

/// Fills the defect and sampled isometry fields.
void measure_hom(AlmostHom& v, const EpsilonAlgebra& a, int samples = 20, std::uint64_t seed = 1);

/// v(X†) = v(X)† on coordinates.
void symmetrize_hom(AlmostHom& v);

struct ImproveOptions {
  int max_rounds = 10;
  double threshold = 0.1;  // largest defect we try to improve
  double plateau = 0.01;   // stop when a round gains less than this fraction
  double floor = 1e-13;
};

struct ImproveReport {
  std::vector<double> defects;  // before round 1, then after each round
};

/// Newton-type step v ← v + ½(w' + w''), w'(X) = Σ p_s v(U_s†) ⋆ (v(U_s X) − v(U_s) ⋆ v(X)).
AlmostHom improve_homomorphism(const AlmostHom& v, const EpsilonAlgebra& a, const Diagonal& d,
                               const ImproveOptions& opt = {}, ImproveReport* report = nullptr);

/// v(X1, X2) = v1(X1) + v2(X2); CrossTalk if S_{P1,P2} ≠ 0 where P_i = v_i(1).
AlmostHom merge(const AlmostHom& v1, const AlmostHom& v2, const EpsilonAlgebra& a);

/// Extends v : M_n -> S_P by a one-dimensional Q equivalent to the projections in P.
AlmostHom extend_matrix_algebra(const AlmostHom& v, const DeltaProjection& q, const EpsilonAlgebra& a,
                                const ImproveOptions& opt = {});

// ------------------------------------------------------------ pipeline

struct ReconstructOptions {
  double delta_target = 0.1;
  int max_retries = 30;
  int samples = 20;
  std::uint64_t seed = 1;
  ImproveOptions improve;
};

struct ReconstructReport {
  std::vector<double> projection_deltas;
  std::vector<std::vector<int>> classes;
  std::vector<double> stage_defects;  // after stage 2 per class, then after stage 3
  std::vector<double> final_rounds;   // improvement history of the last stage
};

struct Reconstruction {
  BlockSpec spec;
  AlmostHom v;
  ReconstructReport report;
};

/// Stage 1 splits projections until every S_P is one-dimensional, stage 2 builds one matrix
/// block per equivalence class, stage 3 merges the blocks. Blocks come out sorted by size, descending.
Reconstruction reconstruct(const EpsilonAlgebra& a, const ReconstructOptions& opt = {});

}  // namespace aiq
