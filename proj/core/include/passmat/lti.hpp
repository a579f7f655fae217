#pragma once

// Continuous-time LTI systems ẋ = Ax + Bu, y = Cx + Du with square transfer
// matrices: frequency-domain passivity samples, structural tests,
// block-diagram composition and impulse response.

#include <functional>
#include <limits>
#include <vector>

#include "passmat/symmat.hpp"

namespace passmat {

/// Marker for ω → ∞ in frequency-indexed functions.
inline constexpr double kInfiniteFrequency = std::numeric_limits<double>::infinity();

inline constexpr double kStabTol = 1e-9;

class StateSpace {
 public:
  /// Validates shapes: A n×n, B n×m, C m×n, D m×m, m ≥ 1, n ≥ 0.
  StateSpace(Matrix a, Matrix b, Matrix c, Matrix d);

  /// Static map y = D u (n = 0).
  static StateSpace Static(const Matrix& d);

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  const Matrix& C() const { return c_; }
  const Matrix& D() const { return d_; }

  int states() const { return static_cast<int>(a_.rows()); }
  int ports() const { return static_cast<int>(d_.rows()); }

 private:
  Matrix a_, b_, c_, d_;
};

/// Sample frequencies for "∀ω" checks: ascending, starts at 0, and the
/// infinity marker is implicitly evaluated after the last finite point.
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::vector<double> finite_omegas);

  /// 400 log-spaced points over [1e−3, 1e4] rad/s plus ω = 0 and ∞.
  static FrequencyGrid Default();
  static FrequencyGrid LogSpaced(double lo, double hi, int points);

  /// Finite frequencies followed by kInfiniteFrequency.
  std::vector<double> omegas() const;
  const std::vector<double>& finite() const { return finite_; }
  std::size_t size() const { return finite_.size() + 1; }

 private:
  std::vector<double> finite_;
};

/// G(jω) = C(jωI − A)⁻¹B + D; returns D at the infinity marker.
CMatrix freq_response(const StateSpace& sys, double omega);

/// H(ω) = (G(jω) + Gᴴ(jω))/2.
HermitianMatrix ifpm_sample(const StateSpace& sys, double omega);

/// K(ω) = (G⁻¹(jω) + G⁻ᴴ(jω))/2; throws NumericalError if G(jω) is singular.
HermitianMatrix ofpm_sample(const StateSpace& sys, double omega);

/// H_R(ω) = (Rᴴ G(jω) + Gᴴ(jω) R)/2. The weighted margin
/// φ = ½ λ_min(Rᴴ G + Gᴴ R) equals λ_min(H_R(ω)).
HermitianMatrix weighted_ifpm_sample(const StateSpace& sys, const CMatrix& r, double omega);

bool is_hurwitz(const StateSpace& sys);
/// All finite invariant zeros strictly in the open left half-plane.
bool is_minimum_phase(const StateSpace& sys);
/// (A, C) observability rank test.
bool is_observable(const StateSpace& sys);

/// Finite generalized eigenvalues of the Rosenbrock pencil [[A − λI, B], [C, D]].
std::vector<Complex> invariant_zeros(const StateSpace& sys);

struct ImpulseResponse {
  Matrix smooth;        ///< C·exp(At)·B
  Matrix delta_weight;  ///< D, weight of the Dirac term at t = 0
};

ImpulseResponse impulse_response(const StateSpace& sys, double t);

/// u shared, y = y₁ + y₂.
StateSpace compose_parallel(const StateSpace& g1, const StateSpace& g2);

/// Negative feedback with e₁ = u₁ − y₂, e₂ = u₂ + y₁; input (u₁, u₂), output (y₁, y₂).
StateSpace compose_feedback(const StateSpace& g1, const StateSpace& g2);

/// Closes y₂ = θ·K·e₂ around sys with u₂ = 0: G_cl = (I + G·θK)⁻¹ G.
StateSpace close_loop_static(const StateSpace& sys, const Matrix& k, double theta);

/// G⁻¹ realization (requires invertible D).
StateSpace inverse_system(const StateSpace& sys);

enum class PassivityFamily {
  Input,   ///< H(ω)
  Output,  ///< K(ω)
};

struct SweepMinimum {
  double value = 0.0;  ///< min λ_min over the refined grid
  double omega = 0.0;  ///< argmin (kInfiniteFrequency when attained at ∞)
  CVector direction;   ///< unit eigenvector of the minimizing sample
};

/// Minimizes λ_min(f(ω)) over the grid, then refines the best local minima by
/// golden-section search in log ω to 1e−6 relative.
SweepMinimum sweep_min_eigenvalue(const std::function<HermitianMatrix(double)>& sample,
                                  const FrequencyGrid& grid);

/// Scalar passivity index: min_ω λ_min(H(ω)) (Input) or of K(ω) (Output).
SweepMinimum scalar_index_freq(const StateSpace& sys, const FrequencyGrid& grid,
                               PassivityFamily family = PassivityFamily::Input);

}  // namespace passmat
