#pragma once

// Dense symmetric / Hermitian matrix kernel: validated value types,
// eigendecomposition, inertia, Loewner-order comparisons and Schur complements.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace passmat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Relative symmetry tolerance applied on construction.
inline constexpr double kSymTol = 1e-10;
/// Largest condition number accepted for pivots and resolvents.
inline constexpr double kCondMax = 1e12;

/// Absolute-plus-relative tolerance for "A ⪯ B" tests:
/// λ_min(B − A) ≥ −(abs + rel·‖B − A‖_F).
struct Tolerance {
  double abs = 1e-9;
  double rel = 1e-9;

  double Bound(double frobenius_norm) const { return abs + rel * frobenius_norm; }
};

/// Real symmetric matrix. Construction rejects inputs whose asymmetry exceeds
/// kSymTol·max(1, ‖M‖_∞); the stored matrix is then exactly symmetric.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(const Matrix& m);

  /// Takes the symmetric part of an arbitrary square matrix.
  static SymmetricMatrix SymmetricPart(const Matrix& m);
  static SymmetricMatrix Zero(int dim);
  static SymmetricMatrix Identity(int dim);
  static SymmetricMatrix Diagonal(const Vector& d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }

  SymmetricMatrix operator+(const SymmetricMatrix& o) const;
  SymmetricMatrix operator-(const SymmetricMatrix& o) const;
  SymmetricMatrix operator-() const;
  SymmetricMatrix operator*(double s) const;
  friend SymmetricMatrix operator*(double s, const SymmetricMatrix& a) { return a * s; }

 private:
  struct Trusted {};
  SymmetricMatrix(Matrix m, Trusted) : m_(std::move(m)) {}
  Matrix m_;
};

/// Complex Hermitian matrix; same validation policy as SymmetricMatrix.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& m);
  HermitianMatrix(const SymmetricMatrix& s);  // NOLINT: real symmetric is Hermitian

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;

 private:
  struct Trusted {};
  HermitianMatrix(CMatrix m, Trusted) : m_(std::move(m)) {}
  friend HermitianMatrix hermitian_part(const CMatrix& m);
  CMatrix m_;
};

template <typename Scalar>
struct EigenDecompositionT {
  Vector values;                               ///< ascending
  Eigen::Matrix<Scalar, -1, -1> vectors;       ///< columns are eigenvectors
};
using EigenDecomposition = EigenDecompositionT<double>;
using HermitianEigenDecomposition = EigenDecompositionT<Complex>;

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;

  bool operator==(const Inertia&) const = default;
};

/// (M + Mᴴ)/2 for any complex square matrix.
HermitianMatrix hermitian_part(const CMatrix& m);

EigenDecomposition eig_sym(const SymmetricMatrix& s);
HermitianEigenDecomposition eig_sym(const HermitianMatrix& h);

double min_eigenvalue(const SymmetricMatrix& s);
double min_eigenvalue(const HermitianMatrix& h);
double max_eigenvalue(const SymmetricMatrix& s);

/// Counts eigenvalues > tol, < −tol and in [−tol, tol].
Inertia inertia(const SymmetricMatrix& s, double tol);

/// True iff A ⪯ B under the tolerance policy.
bool loewner_leq(const SymmetricMatrix& a, const SymmetricMatrix& b,
                 const Tolerance& tol = {});

/// λ_min(B − A); convenience for callers that report margins.
double loewner_margin(const SymmetricMatrix& a, const SymmetricMatrix& b);

bool is_positive_semidefinite(const SymmetricMatrix& s, const Tolerance& tol = {});
bool is_positive_definite(const SymmetricMatrix& s, const Tolerance& tol = {});

enum class SchurPivot { Leading, Trailing };

/// For M = [[A, B], [Bᵀ, C]] with A of size `split`:
/// Leading pivot returns C − Bᵀ A⁻¹ B, Trailing returns A − B C⁻¹ Bᵀ.
/// Throws NumericalError when the pivot's condition number exceeds kCondMax.
SymmetricMatrix schur_complement(const SymmetricMatrix& m, int split,
                                 SchurPivot pivot = SchurPivot::Leading);

struct LowerBoundCheck {
  bool is_lower_bound = false;
  double margin = 0.0;  ///< min over samples of λ_min(sample − C)
};

LowerBoundCheck is_lower_bound(const SymmetricMatrix& c,
                               std::span<const HermitianMatrix> samples,
                               double tol);
LowerBoundCheck is_lower_bound(const SymmetricMatrix& c,
                               std::span<const SymmetricMatrix> samples,
                               double tol);

/// Solves S X = B for symmetric S, rejecting ill-conditioned S.
Matrix solve_checked(const Matrix& s, const Matrix& b, const char* what);
/// Inverse with the same conditioning guard.
Matrix inverse_checked(const Matrix& s, const char* what);

/// Spectral norm (largest singular value).
double spectral_norm(const Matrix& m);

/// Block diagonal assembly.
Matrix block_diag(const Matrix& a, const Matrix& b);

}  // namespace passmat
