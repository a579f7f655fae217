#include "passmat/expm.hpp"

#include <array>
#include <cmath>

#include "passmat/errors.hpp"

namespace passmat {

Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidInput("expm: matrix must be square");
  const Eigen::Index n = a.rows();
  if (n == 0) return Matrix(0, 0);
  if (!a.allFinite()) throw InvalidInput("expm: non-finite entries");

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > 0.5) s = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Matrix x = a / std::ldexp(1.0, s);

  // Padé(6,6): N(x) = Σ c_k x^k, D(x) = Σ (−1)^k c_k x^k.
  constexpr std::array<double, 7> c = {1.0,
                                       1.0 / 2.0,
                                       5.0 / 44.0,
                                       1.0 / 66.0,
                                       1.0 / 792.0,
                                       1.0 / 15840.0,
                                       1.0 / 665280.0};
  const Matrix id = Matrix::Identity(n, n);
  Matrix power = id;
  Matrix num = c[0] * id;
  Matrix den = c[0] * id;
  for (std::size_t k = 1; k < c.size(); ++k) {
    power = power * x;
    num += c[k] * power;
    den += ((k % 2 == 0) ? c[k] : -c[k]) * power;
  }
  Matrix result = den.partialPivLu().solve(num);
  for (int i = 0; i < s; ++i) result = result * result;
  return result;
}

}  // namespace passmat
