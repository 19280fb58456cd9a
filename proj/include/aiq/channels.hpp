#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "aiq/numlin.hpp"

namespace aiq {

/// Heisenberg maps act on observables (UCP = unital CP); Schrödinger maps act on
/// states (the trace-side dual, CPTP when the Heisenberg map is UCP).
enum class Picture { heisenberg, schrodinger };

/// Linear map B(C^dim_in) -> B(C^dim_out) stored as a superoperator on
/// column-stacked matrices: vec(Φ(X)) = superop · vec(X).
struct Channel {
  int dim_in = 0;
  int dim_out = 0;
  Mat superop;
  Picture picture = Picture::heisenberg;

  Channel() = default;
  Channel(int din, int dout, Mat s, Picture p = Picture::heisenberg)
      : dim_in(din), dim_out(dout), superop(std::move(s)), picture(p) {
    if (superop.rows() != static_cast<Eigen::Index>(dout) * dout ||
        superop.cols() != static_cast<Eigen::Index>(din) * din)
      throw Error(ErrorKind::DimMismatch, "superoperator shape does not match dims");
  }

  Mat apply(const Mat& x) const {
    if (x.rows() != dim_in || x.cols() != dim_in) throw Error(ErrorKind::DimMismatch, "channel input shape");
    return unvec(superop * vec(x), dim_out, dim_out);
  }
};

using DualChannel = Channel;

Channel operator-(const Channel& a, const Channel& b);

Channel operator+(const Channel& a, const Channel& b);

inline Channel operator*(double s, const Channel& a) { return Channel(a.dim_in, a.dim_out, s * a.superop, a.picture); }

Channel from_function(int din, int dout, const std::function<Mat(const Mat&)>& f,
                             Picture p = Picture::heisenberg);

/// Φ(X) = Σ K X K† with each K of shape dim_out × dim_in.
Channel from_kraus(const std::vector<Mat>& ks, Picture p = Picture::heisenberg);

/// J(Φ) = Σ_ij E_ij ⊗ Φ(E_ij), input factor first.
Mat to_choi(const Channel& ch);

Channel from_choi(const Mat& j, int din, int dout, Picture p = Picture::heisenberg);

std::vector<Mat> to_kraus(const Channel& ch, const Tolerances& tol = {});

/// Φ(X) = V†(X ⊗ 1_F)V with V : C^dim_out -> C^dim_in ⊗ F.
struct Stinespring {
  Mat v;
  int env_dim = 0;
};

Stinespring to_stinespring(const Channel& ch, const Tolerances& tol = {});

Mat stinespring_apply(const Stinespring& st, const Mat& x);

/// Trace-side dual: the Hilbert–Schmidt adjoint, with the picture flipped.
DualChannel dual(const Channel& ch);

/// X -> (Λ(X) + Λ(X†)†)/2. Differences of CP maps are Hermiticity preserving up to rounding; projecting
/// them keeps the cb-norm solver on its Hermitian path.
Channel hermitian_preserving_part(const Channel& ch);

/// a ∘ b
Channel compose(const Channel& a, const Channel& b);

/// 1_{M_n} ⊗ Φ acting on B(C^n ⊗ C^dim).
Channel tensor_extend(const Channel& ch, int n);

struct ValidityFlags {
  bool cp = false;
  bool unital = false;
  bool trace_preserving = false;
  double choi_min_eig = 0.0;
  double unital_residual = 0.0;
  double tp_residual = 0.0;
};

ValidityFlags validate(const Channel& ch, double tol = 1e-9);

// --------------------------------------------------------- standard maps

Channel identity_channel(int d);

/// X -> Tr(X) I/d.
Channel depolarizing_channel(int d);

/// X -> U X U†.
inline Channel unitary_channel(const Mat& u) { return from_kraus({u}); }

/// X -> Σ_j Π_j X Π_j for consecutive blocks of the given sizes.
Channel pinching_channel(const std::vector<int>& blocks);

/// The two-outcome qubit map X -> P0 Tr(γ0 X) + P1 Tr(γ1 X), with γ0 a pure state
/// at overlap η with |1> and γ1 = |1><1|.  ‖Φ²−Φ‖_cb = 2η√(1−η).
struct ExampleParams {
  Mat gamma0, gamma1, gamma_tilde;
};

ExampleParams example_params(double eta);

Channel example_channel(double eta);

Channel example_idempotent_closed_form(double eta);

// --------------------------------------------------------------- carrier

/// Isometry onto the support of Φ*(I/d).
Mat carrier(const Channel& ch, const Tolerances& tol = {});

/// Orthonormal complement of the columns of an isometry.
Mat complement(const Mat& j);

// ------------------------------------------------------------ generators

Channel gen_random_ucp(int dim, int kraus_rank, std::uint64_t seed);

Channel gen_perturbed(const Channel& ch, double t, std::uint64_t seed);

}  // namespace aiq
