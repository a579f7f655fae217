#pragma once

#include <stdexcept>
#include <string>

namespace passmat {

/// Malformed input: wrong shapes, broken symmetry, unparsable files.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A mathematical precondition does not hold (non-Hurwitz system, indefinite
/// matrix where a definite one is required, infeasible LMI, ...).
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The LMI has no solution at the requested strictness margin.
class InfeasibleError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Ill-conditioned pivots, solver breakdown, non-convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace passmat
