#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aiq/channels.hpp"

namespace aiq {

enum class DefectMethod { basis_bound, sampled, refined };

inline const char* method_name(DefectMethod m) {
  switch (m) {
    case DefectMethod::basis_bound: return "basis_bound";
    case DefectMethod::sampled: return "sampled";
    case DefectMethod::refined: return "refined";
  }
  return "unknown";
}

struct ExtensionDefects {
  int n = 1;
  double eps_submult = 0.0;
  double eps_assoc = 0.0;
  double eps_cstar = 0.0;
};

/// Estimated (not certified) axiom defects: every value is a max over probes, hence a lower bound
/// on the true supremum.
struct DefectReport {
  double eps_submult = 0.0;
  double eps_assoc = 0.0;
  double eps_cstar = 0.0;
  double eps_unit = 0.0;
  int sample_count = 0;
  DefectMethod method = DefectMethod::basis_bound;
  std::vector<ExtensionDefects> extensions;

  double max_eps() const;
};

/// Subspace A ⊆ B(H) with a Hermitian HS-orthonormal basis and a product given by its structure tensor.
/// Column i + j·N of `tensor` holds the coordinates of B_i ⋆ B_j.
struct EpsilonAlgebra {
  int ambient = 0;
  std::vector<Mat> basis;
  Mat bmat;       // d² × N, columns vec(B_i)
  Vec unit;       // coordinates of the unit
  Mat tensor;     // N × N²
  Mat projector;  // N × d², vec(X) -> coordinates of the idempotent's image of X
  DefectReport defects;

  int dim() const { return static_cast<int>(basis.size()); }
  Vec star(const Vec& x, const Vec& y) const;
  Mat left(const Vec& x) const;   // y -> x ⋆ y
  Mat right(const Vec& x) const;  // y -> y ⋆ x
  Mat to_matrix(const Vec& x) const;
  double norm(const Vec& x) const;
  Vec adjoint(const Vec& x) const { return x.conjugate(); }
  Vec coords_of(const Mat& m) const { return bmat.adjoint() * vec(m); }
  Vec project(const Mat& m) const { return projector * vec(m); }
};

struct Idempotentized {
  Channel phi;
  double residual = 0.0;  // ‖S̃² − S̃‖ on the superoperator
};

/// θ(2Φ−1) via the Newton sign iteration, symmetrized so that it commutes with X -> X†.
Idempotentized idempotentize(const Channel& ch, std::optional<double> eta = std::nullopt, const Tolerances& tol = {});

/// Builds the product tensor from a Hermitian orthonormal basis and a coordinate projector.
EpsilonAlgebra algebra_from_basis(const std::vector<Mat>& basis, const Mat& projector);

/// A = image of the idempotent with the product X ⋆ Y = Φ̃(XY).
EpsilonAlgebra extract_algebra(const Channel& phi_tilde);

/// B(C^n) with the ordinary product.
EpsilonAlgebra full_matrix_algebra(int n);

DefectReport measure_defects(const EpsilonAlgebra& a, int samples = 200, int extension_n = 1, std::uint64_t seed = 1);

/// Newton solve of J ⋆ J = J near the unit, then X·Y = R_J⁻¹(X) ⋆ L_J⁻¹(Y).
EpsilonAlgebra exactify_unit(const EpsilonAlgebra& a, const Tolerances& tol = {});

/// max over probes of ‖(C ⊗ 1)V‖ / ‖X‖ with C = (1 − VV†)(Φ(X) ⊗ 1)V, V the Stinespring isometry of Φ.
/// Squared, this equals ‖Φ²(Φ(X†)Φ(X)) − Φ(Φ²(X†)Φ²(X))‖, so it vanishes on exact idempotents.
double choi_residual_check(const Channel& ch, const Channel& phi_tilde, int samples = 40, std::uint64_t seed = 1);

/// Unlayered ‖(1 − VV†)(Φ(X) ⊗ 1)V‖ / ‖X‖; zero only when the carrier is the whole space.
double choi_residual_unlayered(const Channel& ch, int samples = 40, std::uint64_t seed = 1);

struct PhiAssocDefects {
  double left = 0.0;   // ‖Φ(Φ(Φ(X)Φ(Y))Φ(Z)) − Φ(Φ(X)Φ(Y)Φ(Z))‖
  double right = 0.0;  // ‖Φ(Φ(X)Φ(Φ(Y)Φ(Z))) − Φ(Φ(X)Φ(Y)Φ(Z))‖
};

PhiAssocDefects phi_assoc_defects(const Channel& ch, int samples = 40, std::uint64_t seed = 1);

}  // namespace aiq
