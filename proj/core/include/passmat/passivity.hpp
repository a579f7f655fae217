#pragma once

// Matrix-valued passivity indices. A certificate (Φ, Ξ) states that
//
//   d/dt V(x) ≤ uᵀy − uᵀΦu − yᵀΞy,   V(x) = ½ xᵀPx,
//
// which for LTI systems is the LMI W(P, Φ, Ξ) ≺ 0 assembled below.

#include <optional>
#include <string>

#include "passmat/lti.hpp"
#include "passmat/sdp.hpp"
#include "passmat/symmat.hpp"

namespace passmat {

enum class CertificateKind { IFP, OFP, IFOFP };
enum class Provenance { LmiTraceMax, LmiMinEigMax, FrequencySweep, Declared, Composed };
enum class Principle { TraceMax, MinEigMax };

const char* to_string(CertificateKind k);
const char* to_string(Provenance p);
const char* to_string(Principle p);
CertificateKind parse_kind(const std::string& s);
Provenance parse_provenance(const std::string& s);

class PassivityCertificate {
 public:
  /// Enforces: equal dimensions; Ξ = 0 for IFP and Φ = 0 for OFP (within
  /// 1e−12 relative, then stored as exact zeros); storage PSD within 1e−8.
  PassivityCertificate(SymmetricMatrix phi, SymmetricMatrix xi, CertificateKind kind,
                       Provenance provenance,
                       std::optional<SymmetricMatrix> storage = std::nullopt);

  static PassivityCertificate Ifp(SymmetricMatrix phi, Provenance provenance = Provenance::Declared);
  static PassivityCertificate Ofp(SymmetricMatrix xi, Provenance provenance = Provenance::Declared);

  const SymmetricMatrix& phi() const { return phi_; }
  const SymmetricMatrix& xi() const { return xi_; }
  CertificateKind kind() const { return kind_; }
  Provenance provenance() const { return provenance_; }
  /// P of V(x) = ½ xᵀPx when known.
  const std::optional<SymmetricMatrix>& storage() const { return storage_; }
  int dim() const { return phi_.dim(); }

 private:
  SymmetricMatrix phi_;
  SymmetricMatrix xi_;
  CertificateKind kind_;
  Provenance provenance_;
  std::optional<SymmetricMatrix> storage_;
};

struct LmiOptions {
  SdpOptions sdp;
  /// ε = eps_rel · (largest Frobenius norm among the LMI coefficient matrices).
  double eps_rel = 1e-7;
  /// Weight of the trace term relative to t in the MinEigMax objective.
  double secondary_weight = 1e-4;
  /// IFOFP objective weights: w_phi·tr(Φ) + w_xi·tr(Ξ).
  double w_phi = 1.0;
  double w_xi = 1.0;
  /// Box on the entries of Φ and Ξ in IFOFP mode, where the trace objective
  /// can trade Φ against Ξ without bound.
  double ifofp_box = 1e3;
  /// Re-check the result against frequency samples and reject margins below −1e−6.
  bool verify = true;
};

/// The assembled SDP together with the variable layout needed to read
/// P, Φ, Ξ back out of a solution vector.
struct AssembledLmi {
  SdpProblem problem;
  CertificateKind mode = CertificateKind::IFP;
  Principle principle = Principle::TraceMax;
  int n = 0;
  int m = 0;
  double epsilon = 0.0;
  int p_offset = 0;
  int phi_offset = -1;  ///< −1 when Φ is fixed to zero
  int xi_offset = -1;   ///< −1 when Ξ is fixed to zero
  int t_offset = -1;    ///< epigraph variable (MinEigMax only)

  SymmetricMatrix P(const Vector& x) const;
  SymmetricMatrix Phi(const Vector& x) const;
  SymmetricMatrix Xi(const Vector& x) const;
};

/// W(P, Φ, Ξ) =
///   [[PA + AᵀP + 2CᵀΞC,          PB − Cᵀ + 2CᵀΞD        ],
///    [BᵀP − C + 2DᵀΞC,          −(D + Dᵀ) + 2Φ + 2DᵀΞD ]]
/// with P ⪰ εI and −W ⪰ εI. Throws PreconditionError if sys is not Hurwitz.
AssembledLmi assemble_lmi(const StateSpace& sys, CertificateKind mode, Principle principle,
                          const LmiOptions& opts = {});

/// Evaluates W for given P, Φ, Ξ (used by tests and the feasibility route).
SymmetricMatrix lmi_matrix(const StateSpace& sys, const SymmetricMatrix& p,
                           const SymmetricMatrix& phi, const SymmetricMatrix& xi);

PassivityCertificate compute_ifpm(const StateSpace& sys, Principle principle,
                                  const LmiOptions& opts = {});
PassivityCertificate compute_ofpm(const StateSpace& sys, Principle principle,
                                  const LmiOptions& opts = {});
/// Joint (Φ, Ξ) with the weights in opts.
PassivityCertificate compute_ifofp(const StateSpace& sys, const LmiOptions& opts = {},
                                   Principle principle = Principle::TraceMax);

struct ScalarIndices {
  double phi = 0.0;  ///< λ_min(Φ)
  double xi = 0.0;   ///< λ_min(Ξ)
};

ScalarIndices scalar_indices(const PassivityCertificate& cert);

struct CertificateCheck {
  double ifp_margin = 0.0;  ///< min_ω λ_min(H(ω) − Φ)
  /// min_ω λ_min(K(ω) − Ξ); NaN when D is singular (K(∞) undefined).
  double ofp_margin = 0.0;
  bool ofp_via_supply = false;  ///< true when ofp_margin was unavailable
  /// min_ω λ_min(H(ω) − Φ − Gᴴ(jω) Ξ G(jω)): the full supply-rate condition.
  double supply_margin = 0.0;
  /// Margin that decides validity for the certificate's kind.
  double margin = 0.0;
  double worst_omega = 0.0;
  CVector worst_direction;
};

CertificateCheck verify_certificate(const StateSpace& sys, const PassivityCertificate& cert,
                                    const FrequencyGrid& grid = FrequencyGrid::Default());

/// Φ = sym(K), Ξ = 0.
PassivityCertificate static_ifpm(const Matrix& k);

/// True iff sym(K) − Φ ⪰ 0.
bool sector_check_static(const Matrix& k, const SymmetricMatrix& phi, const Tolerance& tol = {});

/// Largest s ≤ 1 with P ⪰ sI and −W(P, Φ, Ξ) ⪰ sI for fixed (Φ, Ξ);
/// the pair is (strictly) LMI-feasible iff the result is positive.
double lmi_feasibility_margin(const StateSpace& sys, const SymmetricMatrix& phi,
                              const SymmetricMatrix& xi, const SdpOptions& opts = {});

}  // namespace passmat
