#include "passmat/cli/experiments.hpp"

#include <limits>

#include "passmat/errors.hpp"
#include "passmat/interconnect.hpp"

namespace passmat::cli {

bool closed_loop_passive(const StateSpace& g1, const Matrix& k, double theta) {
  try {
    const StateSpace cl = close_loop_static(g1, k, theta);
    if (!is_hurwitz(cl)) return false;
    return scalar_index_freq(cl, FrequencyGrid::Default()).value >= -1e-12;
  } catch (const NumericalError&) {
    return false;
  }
}

double true_passivation_threshold(const StateSpace& g1, const Matrix& k, double theta_max, double tol) {
  if (!(theta_max > 0.0)) throw InvalidInput("theta_max must be positive");
  if (closed_loop_passive(g1, k, 0.0)) return 0.0;
  if (!closed_loop_passive(g1, k, theta_max)) return std::numeric_limits<double>::infinity();
  double lo = 0.0;
  double hi = theta_max;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (closed_loop_passive(g1, k, mid) ? hi : lo) = mid;
  }
  return hi;
}

PassivationIndices passivation_indices(const StateSpace& g1, const LmiOptions& opts) {
  PassivationIndices idx;
  idx.xi_trace = compute_ofpm(g1, Principle::TraceMax, opts).xi();
  idx.xi_mineig = compute_ofpm(g1, Principle::MinEigMax, opts).xi();
  idx.xi_scalar = scalar_index_freq(g1, FrequencyGrid::Default(), PassivityFamily::Output).value;
  return idx;
}

PassivationThresholds passivation_thresholds(const StateSpace& g1, const PassivationIndices& idx,
                                             const Matrix& k, double theta_max) {
  const int m = g1.ports();
  PassivationThresholds t;
  t.truth = true_passivation_threshold(g1, k, theta_max);
  t.scalar = passivation_threshold(SymmetricMatrix::Identity(m) * idx.xi_scalar, k, theta_max);
  t.trace = passivation_threshold(idx.xi_trace, k, theta_max);
  t.mineig = passivation_threshold(idx.xi_mineig, k, theta_max);
  return t;
}

}  // namespace passmat::cli
