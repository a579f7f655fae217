#pragma once

// Certificate algebra for parallel and negative-feedback interconnections
// (e₁ = u₁ − y₂, e₂ = u₂ + y₁), passivation by feedback, L2 and Lyapunov
// stability tests, and the passivation-effort comparison.

#include <optional>
#include <string>

#include "passmat/passivity.hpp"
#include "passmat/symmat.hpp"

namespace passmat {

struct InterconnectionVerdict {
  bool satisfied = false;
  std::optional<PassivityCertificate> composed;
  /// λ_min of the binding condition matrix; −inf when a structural flag fails.
  double margin = 0.0;
  std::string binding_condition;
  /// Finite-gain constant (L2 check only).
  std::optional<double> gain_estimate;
};

/// Φ = Φ₁ + Φ₂; Ξ = (Ξ₁⁻¹ + Ξ₂⁻¹)⁻¹ if both Ξᵢ ≻ 0, Ξ = 0 if both Ξᵢ ⪰ 0.
/// Throws PreconditionError for an indefinite Ξᵢ.
PassivityCertificate parallel_cert(const PassivityCertificate& c1, const PassivityCertificate& c2,
                                   const Tolerance& tol = {});

struct FeedbackMultipliers {
  SymmetricMatrix m1;
  SymmetricMatrix m2;
};

/// Mᵢ = Φᵢ − δᵢI with δᵢ = max(1e−3·‖Φᵢ‖₂, 10·kStabTol); the floor keeps Mᵢ strictly below Φᵢ when Φᵢ = 0.
FeedbackMultipliers default_multipliers(const PassivityCertificate& c1, const PassivityCertificate& c2);

/// Certificate of the feedback loop from (u₁, u₂) to (y₁, y₂):
/// Φ = diag(M₁, M₂), Ξ = diag(N₁, N₂) with
/// N₁ = Ξ₁ − Φ₂(Φ₂ − M₂)⁻¹M₂ and N₂ = Ξ₂ − Φ₁(Φ₁ − M₁)⁻¹M₁.
/// Requires Mᵢ ≺ Φᵢ (λ_min(Φᵢ − Mᵢ) > kStabTol).
PassivityCertificate feedback_cert(const PassivityCertificate& c1, const PassivityCertificate& c2,
                                   const SymmetricMatrix& m1, const SymmetricMatrix& m2);

/// The two cross-term matrices left over in the feedback dissipation
/// inequality; both are PSD whenever the Nᵢ satisfy the feedback bound.
struct FeedbackResidual {
  SymmetricMatrix e;  ///< [[Φ₁ − M₁, −Φ₁], [−Φ₁, Ξ₂ + Φ₁ − N₂]] on (u₁, y₂)
  SymmetricMatrix f;  ///< [[Φ₂ − M₂, Φ₂], [Φ₂, Ξ₁ + Φ₂ − N₁]] on (u₂, y₁)
};

FeedbackResidual feedback_residual(const PassivityCertificate& c1, const PassivityCertificate& c2,
                                   const SymmetricMatrix& m1, const SymmetricMatrix& m2,
                                   const SymmetricMatrix& n1, const SymmetricMatrix& n2);

/// Feedback with u₂ = 0. Satisfied iff Φ₂ + Ξ₁ ⪰ 0, Ξ₂ ⪰ 0 and Φ₁ ⪰ 0. When
/// also Φ₁ + Ξ₂ ≻ 0 the closed loop u₁ → y₁ gets the certificate
/// Ξ = Ξ₁ + Φ₂ (on y₁) and Φ = Ξ₂(Φ₁ + Ξ₂)⁻¹Φ₁ (on u₁).
InterconnectionVerdict passivation_check(const PassivityCertificate& c1, const PassivityCertificate& c2,
                                         const Tolerance& tol = {});

/// Smallest θ with λ_min(θ·sym(K) + Ξ₁) ≥ 0, by bisection on [0, theta_max].
/// Returns +inf when even theta_max does not satisfy the condition.
double passivation_threshold(const SymmetricMatrix& xi1, const Matrix& k, double theta_max,
                             double tol = 1e-10);

/// 1/λ_min(Ξ). Requires Ξ ≻ 0 and Φ ⪰ 0.
double l2_gain_bound(const PassivityCertificate& cert, const Tolerance& tol = {});

struct L2GainBlocks {
  Matrix n;           ///< [[I, 2Φ₁], [−2Φ₂, I]]
  SymmetricMatrix m;  ///< diag(Φ₁, Φ₂)
  SymmetricMatrix l;  ///< diag(Ξ₁ + Φ₂, Ξ₂ + Φ₁)
  double a = 0.0;     ///< λ_min(L)
  double b = 0.0;     ///< ‖N‖₂
  double c = 0.0;     ///< ‖M‖₂
  /// √(b² + 2ac)/a, obtained by integrating V̇ ≤ (b²+2ac)/(2a)‖u‖² − (a/2)‖y‖².
  double gain = 0.0;
  /// √((b² + 2ac)/a), the constant in the form usually quoted; equal to
  /// `gain` only when a = 1.
  double gain_quoted = 0.0;
};

L2GainBlocks l2_gain_blocks(const PassivityCertificate& c1, const PassivityCertificate& c2);

/// Satisfied iff Φ₁ + Ξ₂ ≻ 0 and Φ₂ + Ξ₁ ≻ 0; gain_estimate = L2GainBlocks::gain.
InterconnectionVerdict l2_stability_check(const PassivityCertificate& c1, const PassivityCertificate& c2,
                                          const Tolerance& tol = {});

/// Satisfied iff Φ₁ + Ξ₂ ⪰ 0, Φ₂ + Ξ₁ ⪰ 0 and both subsystems are zero-state
/// observable (static maps count as observable).
InterconnectionVerdict lyapunov_stability_check(const PassivityCertificate& c1,
                                                const PassivityCertificate& c2, bool zso1, bool zso2,
                                                const Tolerance& tol = {});

struct PassivationEffort {
  SymmetricMatrix phi_matrix;  ///< −Ξ₁
  SymmetricMatrix phi_scalar;  ///< −λ_min(Ξ₁)·I
  SymmetricMatrix effort_gap;  ///< phi_scalar − phi_matrix ⪰ 0
  bool isotropic = false;      ///< effort_gap = 0, i.e. Ξ₁ ∝ I
};

/// Any symmetric Ξ₁. Directions where Ξ₁ has excess (positive eigenvalues)
/// get a negative entry in phi_matrix; the gap stays PSD.
PassivationEffort passivation_effort(const SymmetricMatrix& xi1, const Tolerance& tol = {});

}  // namespace passmat
