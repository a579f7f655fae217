#include "passmat/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "passmat/errors.hpp"
#include "passmat/expm.hpp"

namespace passmat {

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)) {
  const Eigen::Index m = d_.rows();
  if (m < 1 || d_.cols() != m) throw InvalidInput("StateSpace: D must be square with m >= 1");
  const Eigen::Index n = a_.rows();
  if (a_.cols() != n) throw InvalidInput("StateSpace: A must be square");
  // An empty B/C given as 0x0 is accepted for n = 0.
  if (n == 0) {
    b_.resize(0, m);
    c_.resize(m, 0);
  }
  if (b_.rows() != n || b_.cols() != m) {
    std::ostringstream os;
    os << "StateSpace: B must be " << n << "x" << m << ", got " << b_.rows() << "x" << b_.cols();
    throw InvalidInput(os.str());
  }
  if (c_.rows() != m || c_.cols() != n) {
    std::ostringstream os;
    os << "StateSpace: C must be " << m << "x" << n << ", got " << c_.rows() << "x" << c_.cols();
    throw InvalidInput(os.str());
  }
  if (!a_.allFinite() || !b_.allFinite() || !c_.allFinite() || !d_.allFinite()) {
    throw InvalidInput("StateSpace: non-finite entries");
  }
}

StateSpace StateSpace::Static(const Matrix& d) {
  return StateSpace(Matrix(0, 0), Matrix(0, d.rows()), Matrix(d.rows(), 0), d);
}

FrequencyGrid::FrequencyGrid(std::vector<double> finite_omegas) : finite_(std::move(finite_omegas)) {
  if (finite_.empty() || finite_.front() != 0.0) {
    throw InvalidInput("FrequencyGrid: must start at omega = 0");
  }
  for (std::size_t i = 1; i < finite_.size(); ++i) {
    if (!(finite_[i] > finite_[i - 1]) || !std::isfinite(finite_[i])) {
      throw InvalidInput("FrequencyGrid: frequencies must be finite and strictly increasing");
    }
  }
}

FrequencyGrid FrequencyGrid::LogSpaced(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) {
    throw InvalidInput("FrequencyGrid::LogSpaced: need 0 < lo < hi and points >= 2");
  }
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(points) + 1);
  w.push_back(0.0);
  const double llo = std::log10(lo);
  const double lhi = std::log10(hi);
  for (int i = 0; i < points; ++i) {
    w.push_back(std::pow(10.0, llo + (lhi - llo) * i / (points - 1)));
  }
  return FrequencyGrid(std::move(w));
}

FrequencyGrid FrequencyGrid::Default() { return LogSpaced(1e-3, 1e4, 400); }

std::vector<double> FrequencyGrid::omegas() const {
  std::vector<double> all = finite_;
  all.push_back(kInfiniteFrequency);
  return all;
}

CMatrix freq_response(const StateSpace& sys, double omega) {
  const CMatrix d = sys.D().cast<Complex>();
  if (std::isinf(omega) || sys.states() == 0) return d;
  const int n = sys.states();
  CMatrix resolvent = -sys.A().cast<Complex>();
  resolvent.diagonal().array() += Complex(0.0, omega);
  Eigen::PartialPivLU<CMatrix> lu(resolvent);
  if (!(lu.rcond() * kCondMax >= 1.0)) {
    std::ostringstream os;
    os << "freq_response: j*omega is (nearly) an eigenvalue of A at omega = " << omega;
    throw NumericalError(os.str());
  }
  (void)n;
  return sys.C().cast<Complex>() * lu.solve(sys.B().cast<Complex>()) + d;
}

HermitianMatrix ifpm_sample(const StateSpace& sys, double omega) {
  return hermitian_part(freq_response(sys, omega));
}

HermitianMatrix ofpm_sample(const StateSpace& sys, double omega) {
  const CMatrix g = freq_response(sys, omega);
  Eigen::PartialPivLU<CMatrix> lu(g);
  if (!(lu.rcond() * kCondMax >= 1.0)) {
    std::ostringstream os;
    os << "ofpm_sample: G(j*omega) is singular at omega = " << omega;
    throw NumericalError(os.str());
  }
  return hermitian_part(lu.inverse());
}

HermitianMatrix weighted_ifpm_sample(const StateSpace& sys, const CMatrix& r, double omega) {
  if (r.rows() != sys.ports() || r.cols() != sys.ports()) {
    throw InvalidInput("weighted_ifpm_sample: weight must be m x m");
  }
  return hermitian_part(r.adjoint() * freq_response(sys, omega));
}

bool is_hurwitz(const StateSpace& sys) {
  if (sys.states() == 0) return true;
  Eigen::EigenSolver<Matrix> es(sys.A(), false);
  return es.eigenvalues().real().maxCoeff() < -kStabTol;
}

std::vector<Complex> invariant_zeros(const StateSpace& sys) {
  const int n = sys.states();
  const int m = sys.ports();
  if (n == 0) return {};
  Matrix pencil(n + m, n + m);
  pencil << sys.A(), sys.B(), sys.C(), sys.D();
  Matrix e = Matrix::Zero(n + m, n + m);
  e.topLeftCorner(n, n).setIdentity();

  Eigen::GeneralizedEigenSolver<Matrix> ges(pencil, e, false);
  if (ges.info() != Eigen::Success) throw NumericalError("invariant_zeros: QZ failed");
  const double scale = std::max(1.0, pencil.norm());
  std::vector<Complex> zeros;
  for (Eigen::Index i = 0; i < ges.alphas().size(); ++i) {
    const Complex alpha = ges.alphas()(i);
    const double beta = ges.betas()(i);
    if (std::abs(beta) <= 1e-12 * std::max(1.0, std::abs(alpha))) {
      if (std::abs(alpha) <= 1e-12 * scale) {
        // 0/0: the pencil is singular for every λ (G not invertible).
        throw NumericalError("invariant_zeros: transfer matrix has deficient normal rank");
      }
      continue;  // infinite zero
    }
    zeros.push_back(alpha / beta);
  }
  return zeros;
}

bool is_minimum_phase(const StateSpace& sys) {
  std::vector<Complex> zeros;
  try {
    zeros = invariant_zeros(sys);
  } catch (const NumericalError&) {
    return false;
  }
  if (sys.states() == 0) {
    return sys.D().fullPivLu().isInvertible();
  }
  return std::all_of(zeros.begin(), zeros.end(),
                     [](const Complex& z) { return z.real() < -kStabTol; });
}

bool is_observable(const StateSpace& sys) {
  const int n = sys.states();
  if (n == 0) return true;
  const int m = sys.ports();
  Matrix obs(static_cast<Eigen::Index>(n) * m, n);
  Matrix block = sys.C();
  for (int i = 0; i < n; ++i) {
    obs.middleRows(static_cast<Eigen::Index>(i) * m, m) = block;
    block = block * sys.A();
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(obs);
  qr.setThreshold(1e-10);
  return qr.rank() == n;
}

ImpulseResponse impulse_response(const StateSpace& sys, double t) {
  if (!(t >= 0.0)) throw InvalidInput("impulse_response: t must be >= 0");
  const int m = sys.ports();
  Matrix smooth = Matrix::Zero(m, m);
  if (sys.states() > 0) smooth = sys.C() * expm(sys.A() * t) * sys.B();
  return {std::move(smooth), sys.D()};
}

StateSpace compose_parallel(const StateSpace& g1, const StateSpace& g2) {
  if (g1.ports() != g2.ports()) throw InvalidInput("compose_parallel: port dimension mismatch");
  const int n1 = g1.states();
  const int n2 = g2.states();
  const int m = g1.ports();
  Matrix b(n1 + n2, m);
  b << g1.B(), g2.B();
  Matrix c(m, n1 + n2);
  c << g1.C(), g2.C();
  return StateSpace(block_diag(g1.A(), g2.A()), std::move(b), std::move(c), g1.D() + g2.D());
}

StateSpace compose_feedback(const StateSpace& g1, const StateSpace& g2) {
  if (g1.ports() != g2.ports()) throw InvalidInput("compose_feedback: port dimension mismatch");
  const int m = g1.ports();
  const int n1 = g1.states();
  const int n2 = g2.states();

  // [I, D1; −D2, I] [y1; y2] = diag(C1, C2) x + diag(D1, D2) u
  Matrix loop = Matrix::Identity(2 * m, 2 * m);
  loop.topRightCorner(m, m) = g1.D();
  loop.bottomLeftCorner(m, m) = -g2.D();
  const Matrix loop_inv = inverse_checked(loop, "compose_feedback: algebraic loop");

  const Matrix c_blk = block_diag(g1.C(), g2.C());
  const Matrix d_blk = block_diag(g1.D(), g2.D());
  const Matrix c_cl = loop_inv * c_blk;
  const Matrix d_cl = loop_inv * d_blk;

  // e = u + J y with J = [0, −I; I, 0]
  Matrix j = Matrix::Zero(2 * m, 2 * m);
  j.topRightCorner(m, m) = -Matrix::Identity(m, m);
  j.bottomLeftCorner(m, m) = Matrix::Identity(m, m);
  const Matrix b_blk = block_diag(g1.B(), g2.B());

  Matrix a_cl = block_diag(g1.A(), g2.A()) + b_blk * j * c_cl;
  Matrix b_cl = b_blk * (Matrix::Identity(2 * m, 2 * m) + j * d_cl);
  (void)n1;
  (void)n2;
  return StateSpace(std::move(a_cl), std::move(b_cl), c_cl, d_cl);
}

StateSpace close_loop_static(const StateSpace& sys, const Matrix& k, double theta) {
  const int m = sys.ports();
  if (k.rows() != m || k.cols() != m) throw InvalidInput("close_loop_static: K must be m x m");
  const Matrix tk = theta * k;
  const Matrix loop = Matrix::Identity(m, m) + sys.D() * tk;
  const Matrix loop_inv = inverse_checked(loop, "close_loop_static: algebraic loop");
  Matrix c_cl = loop_inv * sys.C();
  Matrix d_cl = loop_inv * sys.D();
  Matrix a_cl = sys.A() - sys.B() * tk * c_cl;
  Matrix b_cl = sys.B() * (Matrix::Identity(m, m) - tk * d_cl);
  return StateSpace(std::move(a_cl), std::move(b_cl), std::move(c_cl), std::move(d_cl));
}

StateSpace inverse_system(const StateSpace& sys) {
  const Matrix d_inv = inverse_checked(sys.D(), "inverse_system: D");
  return StateSpace(sys.A() - sys.B() * d_inv * sys.C(), sys.B() * d_inv, -d_inv * sys.C(), d_inv);
}

namespace {

struct Evaluated {
  double value;
  double omega;
  CVector direction;
};

Evaluated EvaluateAt(const std::function<HermitianMatrix(double)>& sample, double omega) {
  const HermitianEigenDecomposition ed = eig_sym(sample(omega));
  return {ed.values(0), omega, ed.vectors.col(0)};
}

// Golden-section minimization on [lo, hi]; `logscale` searches in log ω.
Evaluated GoldenSection(const std::function<HermitianMatrix(double)>& sample, double lo, double hi,
                        bool logscale) {
  constexpr double kInvPhi = 0.6180339887498949;
  auto to_omega = [&](double s) { return logscale ? std::exp(s) : s; };
  double a = logscale ? std::log(lo) : lo;
  double b = logscale ? std::log(hi) : hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  Evaluated fc = EvaluateAt(sample, to_omega(c));
  Evaluated fd = EvaluateAt(sample, to_omega(d));
  Evaluated best = fc.value <= fd.value ? fc : fd;
  const double width_tol = logscale ? 1e-6 : 1e-6 * std::max(std::abs(hi), 1e-12);
  for (int iter = 0; iter < 200 && (b - a) > width_tol; ++iter) {
    if (fc.value <= fd.value) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = EvaluateAt(sample, to_omega(c));
      if (fc.value < best.value) best = fc;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = EvaluateAt(sample, to_omega(d));
      if (fd.value < best.value) best = fd;
    }
  }
  return best;
}

}  // namespace

SweepMinimum sweep_min_eigenvalue(const std::function<HermitianMatrix(double)>& sample,
                                  const FrequencyGrid& grid) {
  const std::vector<double>& w = grid.finite();
  std::vector<Evaluated> coarse;
  coarse.reserve(w.size());
  for (double omega : w) coarse.push_back(EvaluateAt(sample, omega));

  Evaluated best = EvaluateAt(sample, kInfiniteFrequency);
  for (const Evaluated& e : coarse) {
    if (e.value < best.value) best = e;
  }

  // Local minima of the coarse finite sweep, best three refined.
  std::vector<std::size_t> minima;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const bool left_ok = i == 0 || coarse[i].value <= coarse[i - 1].value;
    const bool right_ok = i + 1 == coarse.size() || coarse[i].value <= coarse[i + 1].value;
    if (left_ok && right_ok) minima.push_back(i);
  }
  std::sort(minima.begin(), minima.end(),
            [&](std::size_t x, std::size_t y) { return coarse[x].value < coarse[y].value; });
  if (minima.size() > 3) minima.resize(3);

  for (std::size_t i : minima) {
    if (coarse.size() < 2) break;
    const double lo = i == 0 ? 0.0 : w[i - 1];
    double hi;
    if (i + 1 < coarse.size()) {
      hi = w[i + 1];
    } else {
      hi = w[i] * (w[i] / w[i - 1]);
    }
    const Evaluated refined = GoldenSection(sample, lo, hi, lo > 0.0);
    if (refined.value < best.value) best = refined;
  }
  return {best.value, best.omega, best.direction};
}

SweepMinimum scalar_index_freq(const StateSpace& sys, const FrequencyGrid& grid,
                               PassivityFamily family) {
  if (!is_hurwitz(sys)) throw PreconditionError("scalar_index_freq: system not Hurwitz");
  if (family == PassivityFamily::Input) {
    return sweep_min_eigenvalue([&](double w) { return ifpm_sample(sys, w); }, grid);
  }
  return sweep_min_eigenvalue([&](double w) { return ofpm_sample(sys, w); }, grid);
}

}  // namespace passmat
