#pragma once

// Feedback-passivation experiment: plant G₁ closed with the static map
// y₂ = θK e₂, comparing the true passivity threshold in θ with the ones
// certified by the trace-max, min-eig and scalar OFP indices of G₁.

#include "passmat/lti.hpp"
#include "passmat/passivity.hpp"
#include "passmat/symmat.hpp"

namespace passmat::cli {

/// (I + G θK)⁻¹G is Hurwitz and H(ω) ⪰ 0 on the default grid (with
/// golden-section refinement). Singular loops count as not passive.
bool closed_loop_passive(const StateSpace& g1, const Matrix& k, double theta);

/// Smallest θ ∈ [0, theta_max] with closed_loop_passive, by bisection;
/// +inf if theta_max is not passive.
double true_passivation_threshold(const StateSpace& g1, const Matrix& k, double theta_max,
                                  double tol = 1e-10);

struct PassivationIndices {
  SymmetricMatrix xi_trace;
  SymmetricMatrix xi_mineig;
  double xi_scalar = 0.0;  ///< frequency-sweep OFP index
};

PassivationIndices passivation_indices(const StateSpace& g1, const LmiOptions& opts = {});

struct PassivationThresholds {
  double truth = 0.0;
  double scalar = 0.0;
  double trace = 0.0;
  double mineig = 0.0;
};

PassivationThresholds passivation_thresholds(const StateSpace& g1, const PassivationIndices& idx,
                                             const Matrix& k, double theta_max);

}  // namespace passmat::cli
