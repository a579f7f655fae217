#include "passmat/smib.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "passmat/errors.hpp"
#include "passmat/interconnect.hpp"
#include "passmat/parallel.hpp"

namespace passmat {
namespace {

double CrossCoeff(const SmibParams& p) { return p.U * p.U * (p.xdp - p.xq) / (2.0 * p.xdp * p.xq); }

Eigen::Vector2d NominalInput(const SmibParams& p) { return {p.Pm0, p.Ef0}; }

// ∂y/∂x at s.
Eigen::Matrix<double, 2, 3> OutputJacobian(const SmibState& s, const SmibParams& p) {
  Eigen::Matrix<double, 2, 3> c = Eigen::Matrix<double, 2, 3>::Zero();
  c(0, 1) = p.omega0;
  c(1, 0) = p.U * std::sin(s.delta) / (p.xdp * p.Td0p);
  c(1, 2) = (1.0 / (p.xd - p.xdp) + 1.0 / p.xdp) / p.Td0p;
  return c;
}

// ∇H (unshifted) = (P_e, T_jω₀ω, ∂W/∂E′_q).
Eigen::Vector3d HamiltonianGradient(const SmibState& s, const SmibParams& p) {
  const AlgebraicVars a = algebraic_vars(s, p);
  return {a.Pe, p.Tj * p.omega0 * s.omega, s.Eqp / (p.xd - p.xdp) + a.Id};
}

}  // namespace

void SmibParams::Validate() const {
  for (double v : {omega0, Tj, D, Td0p, xd, xq, xdp, U, Pm0, Ef0}) {
    if (!std::isfinite(v)) throw InvalidInput("SMIB parameters must be finite");
  }
  if (!(xdp > 0.0) || !(xd > xdp)) throw InvalidInput("SMIB parameters: need xd > xdp > 0");
  if (!(xq > 0.0)) throw InvalidInput("SMIB parameters: need xq > 0");
  if (!(Tj > 0.0) || !(Td0p > 0.0) || !(omega0 > 0.0) || !(U > 0.0)) {
    throw InvalidInput("SMIB parameters: Tj, Td0p, omega0 and U must be positive");
  }
}

AlgebraicVars algebraic_vars(const SmibState& s, const SmibParams& p) {
  AlgebraicVars a;
  a.Ud = p.U * std::sin(s.delta);
  a.Uq = p.U * std::cos(s.delta);
  a.Id = (s.Eqp - a.Uq) / p.xdp;
  a.Iq = a.Ud / p.xq;
  a.Pe = a.Ud * a.Id + a.Uq * a.Iq;
  return a;
}

double electrical_power(double delta, double eqp, const SmibParams& p) {
  return eqp * p.U * std::sin(delta) / p.xdp + CrossCoeff(p) * std::sin(2.0 * delta);
}

Eigen::Vector3d dynamics(const SmibState& s, const SmibParams& p, const Eigen::Vector2d& u) {
  const AlgebraicVars a = algebraic_vars(s, p);
  return {p.omega0 * s.omega, (u(0) - a.Pe - p.D * s.omega) / p.Tj,
          (u(1) - s.Eqp - (p.xd - p.xdp) * a.Id) / p.Td0p};
}

Eigen::Vector2d output(const SmibState& s, const SmibParams& p) {
  const AlgebraicVars a = algebraic_vars(s, p);
  return {p.omega0 * s.omega, (s.Eqp / (p.xd - p.xdp) + a.Id) / p.Td0p};
}

double hamiltonian_raw(const SmibState& s, const SmibParams& p) {
  const double e = s.Eqp;
  return 0.5 * p.Tj * p.omega0 * s.omega * s.omega + e * e / (2.0 * (p.xd - p.xdp)) + e * e / (2.0 * p.xdp) -
         e * p.U * std::cos(s.delta) / p.xdp - 0.5 * CrossCoeff(p) * std::cos(2.0 * s.delta);
}

double hamiltonian(const SmibState& s, const SmibParams& p, const SmibState& eq) {
  const Eigen::Vector3d grad = HamiltonianGradient(eq, p);
  return hamiltonian_raw(s, p) - hamiltonian_raw(eq, p) - grad.dot(s.vec() - eq.vec());
}

double hamiltonian(const SmibState& s, const SmibParams& p) { return hamiltonian(s, p, equilibrium(p)); }

PassivityCertificate generator_ofpm(const SmibParams& p) {
  p.Validate();
  Vector d(2);
  d << p.D / p.omega0, p.Td0p * (p.xd - p.xdp);
  return PassivityCertificate::Ofp(SymmetricMatrix::Diagonal(d));
}

SmibState equilibrium(const SmibParams& p) {
  p.Validate();
  const double k = (p.xd - p.xdp) / p.xdp;
  auto eqp_of = [&](double d) { return (p.Ef0 + k * p.U * std::cos(d)) / (1.0 + k); };
  auto f = [&](double d) { return electrical_power(d, eqp_of(d), p) - p.Pm0; };
  auto df = [&](double d) {
    const double e = eqp_of(d);
    const double de = -k * p.U * std::sin(d) / (1.0 + k);
    return de * p.U * std::sin(d) / p.xdp + e * p.U * std::cos(d) / p.xdp +
           2.0 * CrossCoeff(p) * std::cos(2.0 * d);
  };

  double lo = 0.0;
  double hi = 0.5 * std::numbers::pi;
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return {lo, 0.0, eqp_of(lo)};
  if (flo * fhi > 0.0) throw PreconditionError("SMIB equilibrium: no operating point with delta in [0, pi/2]");

  double d = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fd = f(d);
    if (std::abs(fd) < 1e-14) break;
    if ((fd < 0.0) == (flo < 0.0)) {
      lo = d;
      flo = fd;
    } else {
      hi = d;
    }
    const double slope = df(d);
    double next = slope != 0.0 ? d - fd / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - d) < 1e-16) {
      d = next;
      break;
    }
    d = next;
  }
  const SmibState s{d, 0.0, eqp_of(d)};
  if (!(dynamics(s, p, NominalInput(p)).norm() < 1e-10)) {
    throw NumericalError("SMIB equilibrium: Newton iteration did not converge");
  }
  return s;
}

Eigen::Vector3d closed_loop_dynamics(const SmibState& s, const SmibParams& p, const Eigen::Matrix2d& k,
                                     const SmibState& eq) {
  const Eigen::Vector2d u = NominalInput(p) - k * (output(s, p) - output(eq, p));
  return dynamics(s, p, u);
}

Eigen::Matrix3d linearize_closed_loop(const SmibParams& p, const Eigen::Matrix2d& k, const SmibState& x,
                                      const SmibState& eq) {
  (void)eq;  // the deviation offset is constant in x
  const double sd = std::sin(x.delta);
  const double cd = std::cos(x.delta);
  const double dpe_dd = x.Eqp * p.U * cd / p.xdp + 2.0 * CrossCoeff(p) * std::cos(2.0 * x.delta);
  const double dpe_de = p.U * sd / p.xdp;
  const double did_dd = p.U * sd / p.xdp;
  const double did_de = 1.0 / p.xdp;

  const Eigen::Matrix<double, 2, 3> du = -k * OutputJacobian(x, p);
  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  j(0, 1) = p.omega0;
  j.row(1) = du.row(0) / p.Tj;
  j(1, 0) -= dpe_dd / p.Tj;
  j(1, 1) -= p.D / p.Tj;
  j(1, 2) -= dpe_de / p.Tj;
  j.row(2) = du.row(1) / p.Td0p;
  j(2, 0) -= (p.xd - p.xdp) * did_dd / p.Td0p;
  j(2, 2) -= (1.0 + (p.xd - p.xdp) * did_de) / p.Td0p;
  return j;
}

Eigen::Matrix3d linearize_closed_loop(const SmibParams& p, const Eigen::Matrix2d& k, const SmibState& x) {
  return linearize_closed_loop(p, k, x, equilibrium(p));
}

double spectral_abscissa(const SmibParams& p, const Eigen::Matrix2d& k) {
  const SmibState eq = equilibrium(p);
  Eigen::EigenSolver<Eigen::Matrix3d> es(linearize_closed_loop(p, k, eq, eq), false);
  return es.eigenvalues().real().maxCoeff();
}

bool small_signal_stable(const SmibParams& p, const Eigen::Matrix2d& k) {
  return spectral_abscissa(p, k) < -kStabTol;
}

Trajectory simulate(const SmibParams& p, const Eigen::Matrix2d& k, const SmibState& x0, const SimOptions& opts) {
  if (!(opts.dt > 0.0) || !std::isfinite(opts.dt)) throw InvalidInput("simulate: dt must be positive");
  if (!(opts.t_end >= 0.0)) throw InvalidInput("simulate: T_end must be non-negative");
  if (opts.record_stride < 1) throw InvalidInput("simulate: record stride must be >= 1");
  const SmibState eq = equilibrium(p);
  const Eigen::Vector2d y0 = output(eq, p);

  Trajectory tr;
  auto record = [&](double t, const Eigen::Vector3d& x) {
    const SmibState s = SmibState::From(x);
    const Eigen::Vector2d y = output(s, p);
    tr.times.push_back(t);
    tr.states.push_back(s);
    tr.outputs.push_back(y);
    tr.inputs.push_back(NominalInput(p) - k * (y - y0));
    tr.hamiltonian.push_back(hamiltonian(s, p, eq));
  };
  auto field = [&](const Eigen::Vector3d& x) { return closed_loop_dynamics(SmibState::From(x), p, k, eq); };

  const long steps = std::lround(std::ceil(opts.t_end / opts.dt - 1e-9));
  Eigen::Vector3d x = x0.vec();
  record(0.0, x);
  for (long i = 1; i <= steps; ++i) {
    const Eigen::Vector3d k1 = field(x);
    const Eigen::Vector3d k2 = field(x + 0.5 * opts.dt * k1);
    const Eigen::Vector3d k3 = field(x + 0.5 * opts.dt * k2);
    const Eigen::Vector3d k4 = field(x + opts.dt * k3);
    x += opts.dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = static_cast<double>(i) * opts.dt;
    if (!x.allFinite() || x.norm() > opts.blowup) {
      tr.diverged = true;
      if (x.allFinite()) record(t, x);
      break;
    }
    if (i % opts.record_stride == 0 || i == steps) record(t, x);
  }
  return tr;
}

SmibState perturbed_start(const SmibParams& p, double r) {
  const SmibState eq = equilibrium(p);
  return SmibState::From(eq.vec() + r * Eigen::Vector3d::Ones() / std::sqrt(3.0));
}

Eigen::Matrix2d sweep_gain(double k11, double k22, double offdiag) {
  Eigen::Matrix2d k;
  k << k11, offdiag, offdiag, k22;
  return k;
}

std::vector<RegionCell> region_sweep(const SmibParams& p, const SweepWindow& w, bool simulate_cells,
                                     const SimOptions& sim) {
  if (w.n11 < 1 || w.n22 < 1) throw InvalidInput("region_sweep: grid sizes must be positive");
  if (!(w.k11_lo <= w.k11_hi) || !(w.k22_lo <= w.k22_hi)) throw InvalidInput("region_sweep: empty window");
  const SmibState eq = equilibrium(p);
  const PassivityCertificate gen = generator_ofpm(p);
  const double gen_min = min_eigenvalue(gen.xi());
  const Tolerance tol;

  auto axis = [](double lo, double hi, int n, int i) {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };

  std::vector<RegionCell> cells(static_cast<std::size_t>(w.n11) * static_cast<std::size_t>(w.n22));
  parallel_for(cells.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx / static_cast<std::size_t>(w.n22));
    const int j = static_cast<int>(idx % static_cast<std::size_t>(w.n22));
    RegionCell& c = cells[idx];
    c.k11 = axis(w.k11_lo, w.k11_hi, w.n11, i);
    c.k22 = axis(w.k22_lo, w.k22_hi, w.n22, j);
    const Eigen::Matrix2d k = sweep_gain(c.k11, c.k22, w.offdiag);
    const PassivityCertificate ctrl = static_ifpm(k);
    c.scalar_cert = min_eigenvalue(ctrl.phi()) + gen_min >= -tol.abs;
    c.matrix_cert = lyapunov_stability_check(gen, ctrl, true, true, tol).satisfied;
    Eigen::EigenSolver<Eigen::Matrix3d> es(linearize_closed_loop(p, k, eq, eq), false);
    c.abscissa = es.eigenvalues().real().maxCoeff();
    c.eig_stable = c.abscissa < -kStabTol;
    if (simulate_cells) {
      const Trajectory tr = simulate(p, k, perturbed_start(p), sim);
      c.simulated_converged = !tr.diverged && (tr.states.back().vec() - eq.vec()).norm() < 1e-3;
    }
  });
  return cells;
}

CaseGains select_cases(const std::vector<RegionCell>& cells, double offdiag) {
  CaseGains out;
  const RegionCell* best[4] = {nullptr, nullptr, nullptr, nullptr};
  for (const RegionCell& c : cells) {
    int cls = 3;
    if (c.scalar_cert) {
      cls = 0;
    } else if (c.matrix_cert) {
      cls = 1;
    } else if (c.eig_stable) {
      cls = 2;
    }
    const RegionCell*& b = best[cls];
    if (b == nullptr || (cls < 3 ? c.abscissa < b->abscissa : c.abscissa > b->abscissa)) b = &c;
  }
  for (int i = 0; i < 4; ++i) {
    if (best[i] != nullptr) out.k[i] = sweep_gain(best[i]->k11, best[i]->k22, offdiag);
  }
  return out;
}

}  // namespace passmat
