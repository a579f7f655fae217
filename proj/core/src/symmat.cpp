#include "passmat/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "passmat/errors.hpp"

namespace passmat {
namespace {

template <typename Derived>
void RequireSquareFinite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw InvalidInput(os.str());
  }
  if (m.rows() < 1) throw InvalidInput(std::string(what) + ": dimension must be >= 1");
  if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entries");
}

// ‖M‖_∞ as the max absolute row sum.
template <typename Derived>
double InfNorm(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(const Matrix& m) {
  RequireSquareFinite(m, "SymmetricMatrix");
  const double scale = std::max(1.0, InfNorm(m));
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymTol * scale) {
    std::ostringstream os;
    os << "SymmetricMatrix: asymmetry " << asym << " exceeds tolerance " << kSymTol * scale;
    throw InvalidInput(os.str());
  }
  m_ = 0.5 * (m + m.transpose());
}

SymmetricMatrix SymmetricMatrix::SymmetricPart(const Matrix& m) {
  RequireSquareFinite(m, "SymmetricPart");
  return SymmetricMatrix(Matrix(0.5 * (m + m.transpose())), Trusted{});
}

SymmetricMatrix SymmetricMatrix::Zero(int dim) {
  return SymmetricMatrix(Matrix::Zero(dim, dim), Trusted{});
}

SymmetricMatrix SymmetricMatrix::Identity(int dim) {
  return SymmetricMatrix(Matrix::Identity(dim, dim), Trusted{});
}

SymmetricMatrix SymmetricMatrix::Diagonal(const Vector& d) {
  return SymmetricMatrix(Matrix(d.asDiagonal()), Trusted{});
}

SymmetricMatrix SymmetricMatrix::operator+(const SymmetricMatrix& o) const {
  if (dim() != o.dim()) throw InvalidInput("SymmetricMatrix +: dimension mismatch");
  return SymmetricMatrix(Matrix(m_ + o.m_), Trusted{});
}

SymmetricMatrix SymmetricMatrix::operator-(const SymmetricMatrix& o) const {
  if (dim() != o.dim()) throw InvalidInput("SymmetricMatrix -: dimension mismatch");
  return SymmetricMatrix(Matrix(m_ - o.m_), Trusted{});
}

SymmetricMatrix SymmetricMatrix::operator-() const {
  return SymmetricMatrix(Matrix(-m_), Trusted{});
}

SymmetricMatrix SymmetricMatrix::operator*(double s) const {
  return SymmetricMatrix(Matrix(s * m_), Trusted{});
}

HermitianMatrix::HermitianMatrix(const CMatrix& m) {
  RequireSquareFinite(m, "HermitianMatrix");
  const double scale = std::max(1.0, InfNorm(m));
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kSymTol * scale) {
    std::ostringstream os;
    os << "HermitianMatrix: non-Hermitian part " << asym << " exceeds tolerance "
       << kSymTol * scale;
    throw InvalidInput(os.str());
  }
  m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix::HermitianMatrix(const SymmetricMatrix& s)
    : m_(s.matrix().cast<Complex>()) {}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw InvalidInput("HermitianMatrix +: dimension mismatch");
  return HermitianMatrix(CMatrix(m_ + o.m_), Trusted{});
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  if (dim() != o.dim()) throw InvalidInput("HermitianMatrix -: dimension mismatch");
  return HermitianMatrix(CMatrix(m_ - o.m_), Trusted{});
}

HermitianMatrix HermitianMatrix::operator*(double s) const {
  return HermitianMatrix(CMatrix(s * m_), Trusted{});
}

HermitianMatrix hermitian_part(const CMatrix& m) {
  RequireSquareFinite(m, "hermitian_part");
  return HermitianMatrix(CMatrix(0.5 * (m + m.adjoint())), HermitianMatrix::Trusted{});
}

EigenDecomposition eig_sym(const SymmetricMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.matrix());
  if (solver.info() != Eigen::Success) throw NumericalError("eig_sym: solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

HermitianEigenDecomposition eig_sym(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) throw NumericalError("eig_sym: solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eigenvalue(const SymmetricMatrix& s) {
  if (s.dim() == 1) return s(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double min_eigenvalue(const HermitianMatrix& h) {
  if (h.dim() == 1) return h.matrix()(0, 0).real();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double max_eigenvalue(const SymmetricMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(s.dim() - 1);
}

Inertia inertia(const SymmetricMatrix& s, double tol) {
  if (tol < 0) throw InvalidInput("inertia: tolerance must be >= 0");
  const Vector values = eig_sym(s).values;
  Inertia result;
  for (double v : values) {
    if (v > tol) {
      ++result.positive;
    } else if (v < -tol) {
      ++result.negative;
    } else {
      ++result.zero;
    }
  }
  return result;
}

double loewner_margin(const SymmetricMatrix& a, const SymmetricMatrix& b) {
  return min_eigenvalue(b - a);
}

bool loewner_leq(const SymmetricMatrix& a, const SymmetricMatrix& b, const Tolerance& tol) {
  if (a.dim() != b.dim()) throw InvalidInput("loewner_leq: dimension mismatch");
  const SymmetricMatrix diff = b - a;
  return min_eigenvalue(diff) >= -tol.Bound(diff.matrix().norm());
}

bool is_positive_semidefinite(const SymmetricMatrix& s, const Tolerance& tol) {
  return min_eigenvalue(s) >= -tol.Bound(s.matrix().norm());
}

bool is_positive_definite(const SymmetricMatrix& s, const Tolerance& tol) {
  return min_eigenvalue(s) > tol.Bound(s.matrix().norm());
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

namespace {

double ConditionNumber(const Matrix& s) {
  Eigen::JacobiSVD<Matrix> svd(s);
  const Vector& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

}  // namespace

Matrix solve_checked(const Matrix& s, const Matrix& b, const char* what) {
  if (s.rows() != s.cols() || s.rows() != b.rows()) {
    throw InvalidInput(std::string(what) + ": dimension mismatch");
  }
  if (s.rows() == 0) return Matrix::Zero(0, b.cols());
  if (ConditionNumber(s) > kCondMax) {
    throw NumericalError(std::string(what) + ": matrix is singular or ill-conditioned");
  }
  return s.partialPivLu().solve(b);
}

Matrix inverse_checked(const Matrix& s, const char* what) {
  return solve_checked(s, Matrix::Identity(s.rows(), s.cols()), what);
}

SymmetricMatrix schur_complement(const SymmetricMatrix& m, int split, SchurPivot pivot) {
  const int n = m.dim();
  if (split <= 0 || split >= n) throw InvalidInput("schur_complement: split must be inside (0, dim)");
  const Matrix& full = m.matrix();
  const Matrix a = full.topLeftCorner(split, split);
  const Matrix b = full.topRightCorner(split, n - split);
  const Matrix c = full.bottomRightCorner(n - split, n - split);
  if (pivot == SchurPivot::Leading) {
    return SymmetricMatrix::SymmetricPart(c - b.transpose() * solve_checked(a, b, "schur_complement"));
  }
  return SymmetricMatrix::SymmetricPart(a - b * solve_checked(c, Matrix(b.transpose()), "schur_complement"));
}

namespace {

template <typename Sample>
LowerBoundCheck LowerBoundImpl(const SymmetricMatrix& c, std::span<const Sample> samples, double tol) {
  if (samples.empty()) throw InvalidInput("is_lower_bound: empty sample set");
  double margin = std::numeric_limits<double>::infinity();
  for (const Sample& s : samples) {
    if (s.dim() != c.dim()) throw InvalidInput("is_lower_bound: dimension mismatch");
    margin = std::min(margin, min_eigenvalue(s - Sample(c)));
  }
  return {margin >= -tol, margin};
}

}  // namespace

LowerBoundCheck is_lower_bound(const SymmetricMatrix& c, std::span<const HermitianMatrix> samples,
                               double tol) {
  return LowerBoundImpl(c, samples, tol);
}

LowerBoundCheck is_lower_bound(const SymmetricMatrix& c, std::span<const SymmetricMatrix> samples,
                               double tol) {
  return LowerBoundImpl(c, samples, tol);
}

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace passmat
