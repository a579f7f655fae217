#pragma once

// Small dense semidefinite programs in inequality form:
//
//   maximize cᵀx  subject to  F0_b + Σ_i x_i F_i,b ⪰ 0  for every block b,
//
// solved by a primal-dual path-following method (HKM direction,
// Mehrotra predictor-corrector) with an infeasible start.

#include <optional>
#include <string>
#include <vector>

#include "passmat/symmat.hpp"

namespace passmat {

struct SdpBlock {
  SymmetricMatrix f0;
  std::vector<SymmetricMatrix> fi;  ///< one coefficient per decision variable
};

struct SdpProblem {
  int num_vars = 0;
  Vector objective;  ///< c, maximized
  std::vector<SdpBlock> blocks;
  /// Optional box bounds lower ≤ x ≤ upper (entries may be ±inf).
  std::optional<Vector> lower;
  std::optional<Vector> upper;

  /// Throws InvalidInput when shapes are inconsistent or there are no blocks.
  void Validate() const;
  /// Largest Frobenius norm among all F matrices.
  double Scale() const;
};

enum class SdpStatus { Optimal, Infeasible, MaxIter, NumericalFailure };

const char* to_string(SdpStatus s);

struct SdpOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iter = 200;
};

struct SdpSolution {
  Vector x;
  SdpStatus status = SdpStatus::NumericalFailure;
  double objective_value = 0.0;
  /// max over blocks of max(0, −λ_min(F(x)))
  double max_constraint_violation = 0.0;
  /// ⟨S, Z⟩ relative to 1 + |cᵀx| + |⟨F0, Z⟩|
  double duality_gap_estimate = 0.0;
  /// ‖c + ⟨Fᵢ, Z⟩‖ / (1 + ‖c‖); can exceed feas_tol on an Optimal result when the
  /// dual has no interior (see message)
  double dual_infeasibility = 0.0;
  int iterations = 0;
  std::string message;
};

SdpSolution solve(const SdpProblem& problem, const SdpOptions& opts = {});

}  // namespace passmat
