#pragma once

// Finite-horizon dissipativity operator of an LTI system. For the supply
// s(u, y) = uᵀQuu u + 2uᵀQuy y + yᵀQyy y and T-periodic inputs,
//
//   ∫₀ᵀ s(u, Gu) dt = ⟨u, D_T u⟩,   D_T = Quu + Quy G + G*Quyᵀ + G*Qyy G,
//
// where G is convolution with the periodic impulse response plus the
// feedthrough D. D_T is discretized on the midpoint grid t_k = (k + ½)h.

#include <optional>
#include <string>
#include <vector>

#include "passmat/lti.hpp"
#include "passmat/passivity.hpp"
#include "passmat/symmat.hpp"

namespace passmat {

struct QuadraticSupplyRate {
  SymmetricMatrix quu;
  Matrix quy;
  SymmetricMatrix qyy;

  /// Quy = ½I, Quu = Qyy = 0, i.e. s = uᵀy.
  static QuadraticSupplyRate Passivity(int m);
  int dim() const { return quu.dim(); }
};

/// K_Q(t, τ) for the passivity supply: smooth = ½(g(t − τ) + g(τ − t)ᵀ) with
/// g the causal impulse response (or its T-periodic extension when `period`
/// is given) and g(0) read as the right limit CB; delta_weight = sym(D).
ImpulseResponse passivity_kernel(const StateSpace& sys, double t, double tau,
                                 std::optional<double> period = std::nullopt);

struct DiscretizedOperator {
  double horizon = 0.0;
  int points = 0;
  double step = 0.0;
  int ports = 0;
  std::vector<double> times;  ///< t_k = origin + (k + ½)h
  SymmetricMatrix matrix;     ///< (N·m)×(N·m), block (i, j) couples t_i and t_j
};

/// Requires sys Hurwitz, N ≥ 8, T > 0. The periodic sum Σ_k exp(A kT) is
/// truncated once ‖exp(A kT)‖₂ < 1e−14. Samples of the causal impulse
/// response at lags 0, h, 2h carry Gregory end-correction weights
/// 3/8, 7/6, 23/24 (the response jumps at lag 0).
DiscretizedOperator discretize_operator(const StateSpace& sys, const QuadraticSupplyRate& q, double horizon,
                                        int points, double origin = 0.0);

struct Eigenpair {
  double value = 0.0;
  /// values[k] is the m-vector at t_k; normalized so h·Σ‖φ_k‖² = 1.
  std::vector<Vector> function;
};

/// The `count` eigenpairs of largest |λ|, ordered by decreasing |λ|.
std::vector<Eigenpair> operator_spectrum(const DiscretizedOperator& op, int count);

struct SpectralMatch {
  int index = 0;          ///< rank in the operator spectrum
  double value = 0.0;     ///< operator eigenvalue
  double omega = 0.0;     ///< matched ω_k = 2πk/T
  int harmonic = 0;       ///< k
  int eig_index = 0;      ///< i in λ_i(H(ω_k)), ascending
  double reference = 0.0; ///< λ_i(H(ω_k))
  double deviation = 0.0; ///< |value − reference| / max(|reference|, 1e−300)
  double alignment = 0.0; ///< projection norm onto span{e^{jωt}v, e^{−jωt}v̄}
};

struct FourierLimitReport {
  double max_relative_deviation = 0.0;
  std::vector<SpectralMatch> matches;
};

/// Compares the top `count` operator eigenvalues (passivity supply) with the
/// multiset {λ_i(H(2πk/T)) : k = 0..N/2}. Nearest neighbour, where every
/// reference within 1e−3 relative of the nearest distance counts as a tie and
/// ties go to the best eigenfunction alignment.
FourierLimitReport fourier_limit_check(const StateSpace& sys, double horizon, int points, int count);

/// ⟨op·δu, δu⟩_h / ‖δu‖²_h for a real or complex grid signal of length N·m
/// (stacked by time sample).
double rayleigh_quotient(const DiscretizedOperator& op, const CVector& signal);
double rayleigh_quotient(const DiscretizedOperator& op, const Vector& signal);

/// Stacks e^{jωt_k}·v over the operator grid.
CVector harmonic_signal(const DiscretizedOperator& op, double omega, const CVector& v);

enum class DecoupleSide { Input, Output };

struct Decoupling {
  Matrix q;  ///< orthogonal; rows are eigenvectors
  Matrix r;  ///< diagonal, ascending
};

/// Φ (Input) or Ξ (Output) = QᵀRQ. Eigenvector signs are fixed so the first
/// nonzero entry of each row is positive.
Decoupling decouple(const PassivityCertificate& cert, DecoupleSide side);

}  // namespace passmat
