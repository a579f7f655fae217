#pragma once

// Third-order single-machine infinite-bus model:
//   δ̇ = ω₀ω,  T_j ω̇ = P_m − P_e − Dω,  T′_d0 Ė′_q = E_f − E′_q − (x_d − x′_d) I_d,
// with the terminal tied directly to the infinite bus (U_d = U sin δ,
// U_q = U cos δ). Inputs u = (P_m, E_f).
//
// Output and storage use the port-Hamiltonian form: y = gᵀ∇H with
//   H = ½T_jω₀ω² + W(δ, E′_q),
//   W = E′_q²/(2(x_d − x′_d)) + E′_q²/(2x′_d) − E′_qU cos δ/x′_d − U²(x′_d − x_q)cos 2δ/(4x′_d x_q),
// so y = (ω₀ω, (E′_q/(x_d − x′_d) + I_d)/T′_d0). H is shifted to its Bregman
// divergence about the equilibrium, which is zero there and satisfies the
// incremental dissipation identity for deviation inputs/outputs.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "passmat/passivity.hpp"
#include "passmat/symmat.hpp"

namespace passmat {

struct SmibParams {
  double omega0 = 100.0 * 3.14159265358979323846;
  double Tj = 15.0;
  double D = 8.0;
  double Td0p = 5.0;
  double xd = 0.5;
  double xq = 0.5;
  double xdp = 0.35;
  double U = 1.0;
  double Pm0 = 0.8;
  double Ef0 = 1.2;

  /// Throws InvalidInput unless xd > xdp > 0, xq > 0, Tj, Td0p, omega0, U > 0
  /// and every field is finite.
  void Validate() const;
};

struct SmibState {
  double delta = 0.0;
  double omega = 0.0;
  double Eqp = 0.0;

  Eigen::Vector3d vec() const { return {delta, omega, Eqp}; }
  static SmibState From(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
};

struct AlgebraicVars {
  double Ud = 0.0;
  double Uq = 0.0;
  double Id = 0.0;
  double Iq = 0.0;
  double Pe = 0.0;
};

AlgebraicVars algebraic_vars(const SmibState& s, const SmibParams& p);

/// E′_qU sin δ/x′_d + U²(x′_d − x_q)/(2x′_d x_q)·sin 2δ.
double electrical_power(double delta, double eqp, const SmibParams& p);

Eigen::Vector3d dynamics(const SmibState& s, const SmibParams& p, const Eigen::Vector2d& u);

Eigen::Vector2d output(const SmibState& s, const SmibParams& p);

/// Unshifted ½T_jω₀ω² + W(δ, E′_q).
double hamiltonian_raw(const SmibState& s, const SmibParams& p);

/// Bregman-shifted H about `eq`; zero at eq.
double hamiltonian(const SmibState& s, const SmibParams& p, const SmibState& eq);
double hamiltonian(const SmibState& s, const SmibParams& p);

/// Φ = 0, Ξ = diag(D/ω₀, T′_d0(x_d − x′_d)).
PassivityCertificate generator_ofpm(const SmibParams& p);

/// Operating point for u = (Pm0, Ef0) with δ ∈ [0, π/2]. Eliminating I_d gives
/// E′_q = (E_f + kU cos δ)/(1 + k), k = (x_d − x′_d)/x′_d, and δ solves
/// P_e(δ, E′_q(δ)) = P_m by safeguarded Newton. Throws PreconditionError
/// when no root exists in that interval.
SmibState equilibrium(const SmibParams& p);

/// Closed-loop field ẋ = f(x, u₀ − K(y(x) − y₀)).
Eigen::Vector3d closed_loop_dynamics(const SmibState& s, const SmibParams& p, const Eigen::Matrix2d& k,
                                     const SmibState& eq);

/// Analytic Jacobian of the closed-loop field at x.
Eigen::Matrix3d linearize_closed_loop(const SmibParams& p, const Eigen::Matrix2d& k, const SmibState& x,
                                      const SmibState& eq);
Eigen::Matrix3d linearize_closed_loop(const SmibParams& p, const Eigen::Matrix2d& k, const SmibState& x);

/// max Re λ of the closed-loop Jacobian at the equilibrium.
double spectral_abscissa(const SmibParams& p, const Eigen::Matrix2d& k);
/// spectral_abscissa < −kStabTol.
bool small_signal_stable(const SmibParams& p, const Eigen::Matrix2d& k);

struct Trajectory {
  std::vector<double> times;
  std::vector<SmibState> states;
  std::vector<Eigen::Vector2d> outputs;
  std::vector<Eigen::Vector2d> inputs;
  std::vector<double> hamiltonian;
  bool diverged = false;
};

struct SimOptions {
  double dt = 2e-4;
  double t_end = 10.0;
  /// Record every n-th step (the final step is always recorded).
  int record_stride = 1;
  double blowup = 1e3;
};

/// Fixed-step RK4. Stops and sets `diverged` once ‖x‖ exceeds opts.blowup
/// or the state becomes non-finite.
Trajectory simulate(const SmibParams& p, const Eigen::Matrix2d& k, const SmibState& x0,
                    const SimOptions& opts = {});

/// x* + r·(1, 1, 1)/√3.
SmibState perturbed_start(const SmibParams& p, double r = 0.03);

struct SweepWindow {
  double k11_lo = -0.4;
  double k11_hi = 0.4;
  double k22_lo = -1.2;
  double k22_hi = 0.6;
  int n11 = 81;
  int n22 = 81;
  double offdiag = 0.1;
};

struct RegionCell {
  double k11 = 0.0;
  double k22 = 0.0;
  bool scalar_cert = false;  ///< λ_min(K) + λ_min(Ξ_gen) ≥ 0
  bool matrix_cert = false;  ///< K + Ξ_gen ⪰ 0 (Lyapunov interconnection test)
  bool eig_stable = false;
  double abscissa = 0.0;
  std::optional<bool> simulated_converged;
};

Eigen::Matrix2d sweep_gain(double k11, double k22, double offdiag);

/// Row-major over K₁₁ (outer) and K₂₂ (inner). With `simulate_cells` each
/// cell is also simulated from perturbed_start and flagged converged when
/// ‖x(T) − x*‖ < 1e−3.
std::vector<RegionCell> region_sweep(const SmibParams& p, const SweepWindow& w = {},
                                     bool simulate_cells = false, const SimOptions& sim = {});

/// Representative gains per region class: 1 scalar-certified, 2 matrix-only,
/// 3 stable but uncertified, 4 unstable. Classes 1–3 pick the cell with the
/// most negative abscissa, class 4 the largest. Missing classes are nullopt.
struct CaseGains {
  std::optional<Eigen::Matrix2d> k[4];
};

CaseGains select_cases(const std::vector<RegionCell>& cells, double offdiag = 0.1);

}  // namespace passmat
