#pragma once

// The 2×2 benchmark plant, its reference OFP matrices and the static gains
// used in the feedback-passivation experiment.

#include <string>

#include "passmat/lti.hpp"
#include "passmat/symmat.hpp"

namespace passmat::testing {

inline StateSpace Plant() {
  Matrix a(2, 2), b(2, 2), c(2, 2), d(2, 2);
  a << -2, 3, -8, -10;
  b << -1.3, 3.4, 3.6, -1.7;
  c << 8, 9, 10, 7;
  d << 8, 8, 6, -8;
  return StateSpace(a, b, c, d);
}

inline SymmetricMatrix Mat2(double a, double b, double c) {
  Matrix m(2, 2);
  m << a, b, b, c;
  return SymmetricMatrix(m);
}

/// Reference trace-maximal OFPM (4 digits).
inline SymmetricMatrix XiTraceRef() { return Mat2(0.0373, 0.0618, -0.0920); }
/// Reference min-eigenvalue-maximal OFPM (4 digits).
inline SymmetricMatrix XiMinEigRef() { return Mat2(-0.06127, 0.0176, -0.1029); }

inline constexpr double kXiScalarRef = -0.1095;
inline constexpr double kXiTraceMinEigRef = -0.1167;

inline Matrix K1() { return Mat2(0.987, 0.643, 1.013).matrix(); }
inline Matrix K2() { return Mat2(0.91, 0.149, 1.09).matrix(); }
inline Matrix K3() { return Matrix::Identity(2, 2); }

inline std::string DataPath(const std::string& name) { return std::string(PASSMAT_TEST_DATA_DIR) + "/" + name; }

}  // namespace passmat::testing
