#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "aiq/error.hpp"

namespace aiq {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Rng = std::mt19937_64;

struct Tolerances {
  double eq_tol = 1e-9;
  double rank_rel_tol = 1e-6;
  int newton_max_iter = 100;
};

struct SpectralDecomposition {
  RVec values;  // descending
  Mat vectors;
};

inline Mat identity(int n) { return Mat::Identity(n, n); }

// ---------------------------------------------------------------- norms

RVec singular_values(const Mat& m);

double operator_norm(const Mat& m);

double trace_norm(const Mat& m);

/// Tr(A†B)
cplx hs_inner(const Mat& a, const Mat& b);

bool is_hermitian(const Mat& m, double tol);

inline Mat hermitian_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

// ------------------------------------------------------------ spectral

/// Hermitian eigendecomposition with eigenvalues in descending order.
/// Eigenvector phases are fixed so the largest component is real positive.
SpectralDecomposition herm_eig(const Mat& m, const Tolerances& tol = {});

Mat spectral_function(const SpectralDecomposition& sd, const std::function<double(double)>& f);

struct SqrtPair {
  Mat sqrt;
  Mat inv_sqrt;
};

SqrtPair matrix_sqrt_inv_sqrt(const Mat& m, const Tolerances& tol = {});

/// Square root of a PSD matrix with negative rounding eigenvalues clipped to zero.
Mat psd_sqrt(const Mat& m);

/// Matrix sign by scaled Newton iteration S <- (mu S + (mu S)^{-1})/2.
Mat matrix_sign(const Mat& m, const Tolerances& tol = {});

/// (I + sgn M)/2, an idempotent commuting with M.
Mat theta(const Mat& m, const Tolerances& tol = {});

// ------------------------------------------------------------- tensors

Mat kron(const Mat& a, const Mat& b);

Vec kron(const Vec& a, const Vec& b);

/// Trace out every subsystem not listed in `keep`; subsystem 0 is the outermost factor.
Mat partial_trace(const Mat& m, const std::vector<int>& dims, const std::vector<int>& keep);

/// Tr over the second factor of C^da ⊗ C^db.
inline Mat ptrace_second(const Mat& m, int da, int db) { return partial_trace(m, {da, db}, {0}); }
/// Tr over the first factor of C^da ⊗ C^db.
inline Mat ptrace_first(const Mat& m, int da, int db) { return partial_trace(m, {da, db}, {1}); }

/// Column-stacking vectorization.
inline Vec vec(const Mat& x) { return Eigen::Map<const Vec>(x.data(), x.size()); }

Mat unvec(const Vec& v, Eigen::Index rows, Eigen::Index cols);

/// Permutation K with vec(Xᵀ) = K vec(X) for square n×n X.
Mat transpose_permutation(int n);

// ------------------------------------------------------ rank decisions

/// Orthonormal basis of the column space; columns with σ > rel_tol·σ_max are kept.
Mat column_space(const Mat& m, double rel_tol);

/// Same, with an absolute singular-value cut (natural for idempotents, whose nonzero σ are ≥ 1).
Mat column_space_abs(const Mat& m, double abs_tol);

RMat real_column_space(const RMat& m, double rel_tol);

/// Orthonormal basis of the null space at relative threshold.
Mat null_space(const Mat& m, double rel_tol);

/// Hermitian basis, orthonormal for the real HS inner product, of the complex span of
/// a †-closed family of m×m matrices.
std::vector<Mat> hermitian_span_basis(const std::vector<Mat>& ms, int m, double rel_tol = 1e-9);

/// Unitary factor of the polar decomposition.
Mat polar_unitary(const Mat& m);

// -------------------------------------------------------------- random

Mat random_gaussian(int rows, int cols, Rng& rng);

inline Mat random_hermitian(int n, Rng& rng) { return hermitian_part(random_gaussian(n, n, rng)); }

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
Mat random_unitary(int n, Rng& rng);

/// Random full-rank density matrix (normalized Wishart).
Mat random_density(int n, Rng& rng);

RVec random_real(int n, Rng& rng);

}  // namespace aiq
