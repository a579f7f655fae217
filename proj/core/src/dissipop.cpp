#include "passmat/dissipop.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>

#include "passmat/errors.hpp"
#include "passmat/expm.hpp"
#include "passmat/parallel.hpp"

namespace passmat {
namespace {

// Gregory end-correction weights for ∫₀^∞ f(s) ds ≈ h Σ w_ℓ f(ℓh).
constexpr double kGregory[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};

constexpr double kMatchBand = 1e-3;

// Σ_{k≥0} exp(A kT), truncated when the next term drops below 1e−14 in norm.
Matrix PeriodicSum(const Matrix& a, double period) {
  const Eigen::Index n = a.rows();
  const Matrix step = expm(a * period);
  Matrix term = Matrix::Identity(n, n);
  Matrix sum = term;
  for (int k = 1; k < 10000000; ++k) {
    term = term * step;
    if (spectral_norm(term) < 1e-14) return sum;
    sum += term;
  }
  throw NumericalError("periodic extension does not converge (A too close to the imaginary axis)");
}

// exp(A·ℓh) for ℓ = 0..count−1; recomputed from scratch every 64 steps.
std::vector<Matrix> ExpPowers(const Matrix& a, double h, int count) {
  std::vector<Matrix> out(static_cast<std::size_t>(count));
  const Matrix eh = expm(a * h);
  for (int l = 0; l < count; ++l) {
    out[static_cast<std::size_t>(l)] =
        (l % 64 == 0) ? expm(a * (h * l)) : Matrix(out[static_cast<std::size_t>(l - 1)] * eh);
  }
  return out;
}


double AlignmentScore(const Vector& phi_unit, const std::vector<double>& times, double omega,
                      const CVector& v) {
  const Eigen::Index m = v.size();
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());
  CVector b1(n * m);
  for (Eigen::Index k = 0; k < n; ++k) {
    b1.segment(k * m, m) = std::exp(Complex(0.0, omega * times[static_cast<std::size_t>(k)])) * v;
  }
  const CVector b2 = b1.conjugate();
  const CVector phi = phi_unit.cast<Complex>();
  // Gram–Schmidt on {b1, b2}; b2 may be parallel to b1 (ω = 0 with real v).
  const CVector q1 = b1 / b1.norm();
  CVector r2 = b2 - q1 * q1.dot(b2);
  double proj2 = std::norm(q1.dot(phi));
  if (r2.norm() > 1e-8 * b2.norm()) {
    const CVector q2 = r2 / r2.norm();
    proj2 += std::norm(q2.dot(phi));
  }
  return std::sqrt(proj2);
}

}  // namespace

QuadraticSupplyRate QuadraticSupplyRate::Passivity(int m) {
  return {SymmetricMatrix::Zero(m), 0.5 * Matrix::Identity(m, m), SymmetricMatrix::Zero(m)};
}

ImpulseResponse passivity_kernel(const StateSpace& sys, double t, double tau, std::optional<double> period) {
  if (!is_hurwitz(sys)) throw PreconditionError("passivity_kernel: system not Hurwitz");
  const int m = sys.ports();
  auto g = [&](double s) -> Matrix {
    if (sys.states() == 0) return Matrix::Zero(m, m);
    if (period) {
      if (!(*period > 0.0)) throw InvalidInput("passivity_kernel: period must be positive");
      double r = std::fmod(s, *period);
      if (r < 0.0) r += *period;
      return sys.C() * expm(sys.A() * r) * PeriodicSum(sys.A(), *period) * sys.B();
    }
    if (s < 0.0) return Matrix::Zero(m, m);
    return sys.C() * expm(sys.A() * s) * sys.B();
  };
  const Matrix smooth = 0.5 * (g(t - tau) + g(tau - t).transpose());
  return {smooth, 0.5 * (sys.D() + sys.D().transpose())};
}

DiscretizedOperator discretize_operator(const StateSpace& sys, const QuadraticSupplyRate& q, double horizon,
                                        int points, double origin) {
  if (!(horizon > 0.0)) throw InvalidInput("discretize_operator: T must be positive");
  if (points < 8) throw InvalidInput("discretize_operator: N must be >= 8");
  const int m = sys.ports();
  if (q.dim() != m || q.quy.rows() != m || q.quy.cols() != m || q.qyy.dim() != m) {
    throw InvalidInput("discretize_operator: supply rate dimension mismatch");
  }
  if (!is_hurwitz(sys)) throw PreconditionError("discretize_operator: system not Hurwitz");

  const int n_pts = points;
  const double h = horizon / n_pts;
  const Eigen::Index dim = static_cast<Eigen::Index>(n_pts) * m;

  // Weighted periodic impulse-response samples g_w(d), d = 0..N−1.
  std::vector<Matrix> gw(static_cast<std::size_t>(n_pts), Matrix::Zero(m, m));
  if (sys.states() > 0) {
    const Matrix per = PeriodicSum(sys.A(), horizon);
    const Matrix per_b = per * sys.B();
    const std::vector<Matrix> pw = ExpPowers(sys.A(), h, n_pts);
    for (int d = 0; d < n_pts; ++d) {
      const Matrix c_e = sys.C() * pw[static_cast<std::size_t>(d)];
      Matrix g = c_e * per_b;
      if (d < 3) g += (kGregory[d] - 1.0) * (c_e * sys.B());
      gw[static_cast<std::size_t>(d)] = std::move(g);
    }
  }

  // Convolution operator G_d = h·[g_w((i − j) mod N)] + blockdiag(D).
  Matrix gd(dim, dim);
  parallel_for(static_cast<std::size_t>(n_pts), [&](std::size_t i) {
    const int ii = static_cast<int>(i);
    for (int j = 0; j < n_pts; ++j) {
      const int lag = ((ii - j) % n_pts + n_pts) % n_pts;
      Matrix blk = h * gw[static_cast<std::size_t>(lag)];
      if (ii == j) blk += sys.D();
      gd.block(static_cast<Eigen::Index>(ii) * m, static_cast<Eigen::Index>(j) * m, m, m) = blk;
    }
  });

  // Quu + Quy G_d + G_dᵀ Quyᵀ + G_dᵀ Qyy G_d with block-diagonal Q factors.
  Matrix quy_g(dim, dim);
  for (int i = 0; i < n_pts; ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(i) * m;
    quy_g.middleRows(r, m) = q.quy * gd.middleRows(r, m);
  }
  Matrix op = quy_g + quy_g.transpose();
  for (int i = 0; i < n_pts; ++i) {
    const Eigen::Index r = static_cast<Eigen::Index>(i) * m;
    op.block(r, r, m, m) += q.quu.matrix();
  }
  if (q.qyy.matrix().cwiseAbs().maxCoeff() > 0.0) {
    Matrix qyy_g(dim, dim);
    for (int i = 0; i < n_pts; ++i) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * m;
      qyy_g.middleRows(r, m) = q.qyy.matrix() * gd.middleRows(r, m);
    }
    op.noalias() += gd.transpose() * qyy_g;
  }
  const double asym = (op - op.transpose()).norm();
  if (asym > 1e-8 * std::max(1.0, op.norm())) {
    throw NumericalError("discretize_operator: assembled operator is not self-adjoint");
  }

  DiscretizedOperator out;
  out.horizon = horizon;
  out.points = n_pts;
  out.step = h;
  out.ports = m;
  out.times.resize(static_cast<std::size_t>(n_pts));
  for (int k = 0; k < n_pts; ++k) out.times[static_cast<std::size_t>(k)] = origin + (k + 0.5) * h;
  out.matrix = SymmetricMatrix::SymmetricPart(op);
  return out;
}

namespace {

struct FullSpectrum {
  Vector values;
  Matrix vectors;
  std::vector<Eigen::Index> order;  // by decreasing |λ|
};

FullSpectrum SolveOperator(const DiscretizedOperator& op) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(op.matrix.matrix());
  if (es.info() != Eigen::Success) throw NumericalError("operator_spectrum: eigensolver failed");
  FullSpectrum s{es.eigenvalues(), es.eigenvectors(), {}};
  s.order.resize(static_cast<std::size_t>(s.values.size()));
  std::iota(s.order.begin(), s.order.end(), Eigen::Index{0});
  std::stable_sort(s.order.begin(), s.order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(s.values(a)) > std::abs(s.values(b));
  });
  return s;
}

}  // namespace

std::vector<Eigenpair> operator_spectrum(const DiscretizedOperator& op, int count) {
  const Eigen::Index dim = op.matrix.dim();
  if (count < 0 || count > dim) throw InvalidInput("operator_spectrum: count must be in [0, N*m]");
  const FullSpectrum s = SolveOperator(op);
  const double scale = 1.0 / std::sqrt(op.step);
  std::vector<Eigenpair> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int r = 0; r < count; ++r) {
    const Eigen::Index idx = s.order[static_cast<std::size_t>(r)];
    Eigenpair p;
    p.value = s.values(idx);
    p.function.reserve(static_cast<std::size_t>(op.points));
    for (int k = 0; k < op.points; ++k) {
      p.function.push_back(scale * s.vectors.col(idx).segment(static_cast<Eigen::Index>(k) * op.ports, op.ports));
    }
    out.push_back(std::move(p));
  }
  return out;
}

FourierLimitReport fourier_limit_check(const StateSpace& sys, double horizon, int points, int count) {
  const DiscretizedOperator op =
      discretize_operator(sys, QuadraticSupplyRate::Passivity(sys.ports()), horizon, points);
  const Eigen::Index dim = op.matrix.dim();
  if (count < 1 || count > dim) throw InvalidInput("fourier_limit_check: count must be in [1, N*m]");
  const FullSpectrum s = SolveOperator(op);

  struct Reference {
    int harmonic;
    int eig_index;
    double omega;
    double value;
    CVector vector;
  };
  std::vector<Reference> refs;
  for (int k = 0; k <= points / 2; ++k) {
    const double w = 2.0 * std::numbers::pi * k / horizon;
    const HermitianEigenDecomposition ed = eig_sym(ifpm_sample(sys, w));
    for (Eigen::Index i = 0; i < ed.values.size(); ++i) {
      refs.push_back({k, static_cast<int>(i), w, ed.values(i), ed.vectors.col(i)});
    }
  }

  FourierLimitReport report;
  for (int r = 0; r < count; ++r) {
    const Eigen::Index idx = s.order[static_cast<std::size_t>(r)];
    const double lambda = s.values(idx);
    const Vector phi = s.vectors.col(idx);

    // Near the peak of λ(H(ω)) neighbouring harmonics are closer together
    // than the discretization error, so "nearest" is only decided up to a
    // band of kMatchBand relative; inside it the eigenfunction alignment picks.
    double best = std::numeric_limits<double>::infinity();
    for (const Reference& ref : refs) best = std::min(best, std::abs(lambda - ref.value));
    const double band = best + kMatchBand * std::max(1.0, std::abs(lambda));

    const Reference* chosen = nullptr;
    double chosen_align = -1.0;
    double chosen_dist = 0.0;
    for (const Reference& ref : refs) {
      const double dist = std::abs(lambda - ref.value);
      if (dist > band) continue;
      const double a = AlignmentScore(phi, op.times, ref.omega, ref.vector);
      if (chosen == nullptr || a > chosen_align + 1e-6 || (a > chosen_align - 1e-6 && dist < chosen_dist)) {
        chosen_align = a;
        chosen_dist = dist;
        chosen = &ref;
      }
    }
    SpectralMatch match;
    match.index = r;
    match.value = lambda;
    match.omega = chosen->omega;
    match.harmonic = chosen->harmonic;
    match.eig_index = chosen->eig_index;
    match.reference = chosen->value;
    match.deviation = std::abs(lambda - chosen->value) / std::max(std::abs(chosen->value), 1e-300);
    match.alignment = chosen_align;
    report.max_relative_deviation = std::max(report.max_relative_deviation, match.deviation);
    report.matches.push_back(match);
  }
  return report;
}

double rayleigh_quotient(const DiscretizedOperator& op, const CVector& signal) {
  if (signal.size() != op.matrix.dim()) throw InvalidInput("rayleigh_quotient: signal length must be N*m");
  const double norm2 = signal.squaredNorm();
  if (!(norm2 > 0.0)) throw InvalidInput("rayleigh_quotient: zero signal");
  const CVector ms = op.matrix.matrix().cast<Complex>() * signal;
  return signal.dot(ms).real() / norm2;
}

double rayleigh_quotient(const DiscretizedOperator& op, const Vector& signal) {
  return rayleigh_quotient(op, CVector(signal.cast<Complex>()));
}

CVector harmonic_signal(const DiscretizedOperator& op, double omega, const CVector& v) {
  if (v.size() != op.ports) throw InvalidInput("harmonic_signal: vector must have m entries");
  CVector out(op.matrix.dim());
  for (int k = 0; k < op.points; ++k) {
    out.segment(static_cast<Eigen::Index>(k) * op.ports, op.ports) =
        std::exp(Complex(0.0, omega * op.times[static_cast<std::size_t>(k)])) * v;
  }
  return out;
}

Decoupling decouple(const PassivityCertificate& cert, DecoupleSide side) {
  const SymmetricMatrix& s = side == DecoupleSide::Input ? cert.phi() : cert.xi();
  const EigenDecomposition ed = eig_sym(s);
  Matrix q = ed.vectors.transpose();
  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    for (Eigen::Index c = 0; c < q.cols(); ++c) {
      if (std::abs(q(r, c)) > 1e-12) {
        if (q(r, c) < 0.0) q.row(r) *= -1.0;
        break;
      }
    }
  }
  return {q, Matrix(ed.values.asDiagonal())};
}

}  // namespace passmat
