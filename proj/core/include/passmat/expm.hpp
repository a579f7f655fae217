#pragma once

#include "passmat/symmat.hpp"

namespace passmat {

/// Matrix exponential by scaling and squaring with a diagonal Padé(6,6)
/// approximant; the scaling exponent s is chosen so that ‖A‖₁/2^s ≤ 0.5.
Matrix expm(const Matrix& a);

}  // namespace passmat
