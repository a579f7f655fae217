#include "passmat/interconnect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "passmat/errors.hpp"

namespace passmat {
namespace {

void RequireSameDim(const PassivityCertificate& c1, const PassivityCertificate& c2, const char* what) {
  if (c1.dim() != c2.dim()) throw InvalidInput(std::string(what) + ": certificate dimensions differ");
}

bool IsZero(const SymmetricMatrix& s) { return s.matrix().cwiseAbs().maxCoeff() == 0.0; }

CertificateKind KindFor(const SymmetricMatrix& phi, const SymmetricMatrix& xi) {
  if (IsZero(xi)) return CertificateKind::IFP;
  if (IsZero(phi)) return CertificateKind::OFP;
  return CertificateKind::IFOFP;
}

double Bound(const Tolerance& tol, const SymmetricMatrix& s) { return tol.Bound(s.matrix().norm()); }

std::optional<SymmetricMatrix> StackedStorage(const PassivityCertificate& c1, const PassivityCertificate& c2) {
  if (!c1.storage() || !c2.storage()) return std::nullopt;
  return SymmetricMatrix(block_diag(c1.storage()->matrix(), c2.storage()->matrix()));
}

// X + X A⁻¹ X for A ≻ 0, written symmetrically; equals Φ(Φ − M)⁻¹M with A = Φ − M, X = M.
SymmetricMatrix CorrectionTerm(const SymmetricMatrix& phi, const SymmetricMatrix& m) {
  const Matrix a = phi.matrix() - m.matrix();
  return SymmetricMatrix::SymmetricPart(m.matrix() +
                                        m.matrix() * solve_checked(a, m.matrix(), "feedback_cert"));
}

}  // namespace

PassivityCertificate parallel_cert(const PassivityCertificate& c1, const PassivityCertificate& c2,
                                   const Tolerance& tol) {
  RequireSameDim(c1, c2, "parallel_cert");
  const SymmetricMatrix phi = c1.phi() + c2.phi();
  const int m = c1.dim();
  SymmetricMatrix xi = SymmetricMatrix::Zero(m);
  const double l1 = min_eigenvalue(c1.xi());
  const double l2 = min_eigenvalue(c2.xi());
  if (l1 > Bound(tol, c1.xi()) && l2 > Bound(tol, c2.xi())) {
    const Matrix inv_sum = inverse_checked(c1.xi().matrix(), "parallel_cert: Xi1") +
                           inverse_checked(c2.xi().matrix(), "parallel_cert: Xi2");
    xi = SymmetricMatrix::SymmetricPart(inverse_checked(inv_sum, "parallel_cert"));
  } else if (l1 < -Bound(tol, c1.xi()) || l2 < -Bound(tol, c2.xi())) {
    throw PreconditionError("parallel_cert: indefinite Xi supplied to the harmonic-mean path");
  }
  // Otherwise both Ξᵢ ⪰ 0 with one singular: the output terms are dropped, Ξ = 0.
  return PassivityCertificate(phi, xi, KindFor(phi, xi), Provenance::Composed, StackedStorage(c1, c2));
}

FeedbackMultipliers default_multipliers(const PassivityCertificate& c1, const PassivityCertificate& c2) {
  auto pick = [](const SymmetricMatrix& phi) {
    const double delta = std::max(1e-3 * spectral_norm(phi.matrix()), 10.0 * kStabTol);
    return phi - SymmetricMatrix::Identity(phi.dim()) * delta;
  };
  return {pick(c1.phi()), pick(c2.phi())};
}

PassivityCertificate feedback_cert(const PassivityCertificate& c1, const PassivityCertificate& c2,
                                   const SymmetricMatrix& m1, const SymmetricMatrix& m2) {
  RequireSameDim(c1, c2, "feedback_cert");
  const int m = c1.dim();
  if (m1.dim() != m || m2.dim() != m) throw InvalidInput("feedback_cert: multiplier dimension mismatch");
  if (min_eigenvalue(c1.phi() - m1) <= kStabTol) {
    throw PreconditionError("feedback_cert: M1 must satisfy M1 < Phi1 strictly");
  }
  if (min_eigenvalue(c2.phi() - m2) <= kStabTol) {
    throw PreconditionError("feedback_cert: M2 must satisfy M2 < Phi2 strictly");
  }
  const SymmetricMatrix n1 = c1.xi() - CorrectionTerm(c2.phi(), m2);
  const SymmetricMatrix n2 = c2.xi() - CorrectionTerm(c1.phi(), m1);
  const SymmetricMatrix phi(block_diag(m1.matrix(), m2.matrix()));
  const SymmetricMatrix xi(block_diag(n1.matrix(), n2.matrix()));
  return PassivityCertificate(phi, xi, KindFor(phi, xi), Provenance::Composed, StackedStorage(c1, c2));
}

FeedbackResidual feedback_residual(const PassivityCertificate& c1, const PassivityCertificate& c2,
                                   const SymmetricMatrix& m1, const SymmetricMatrix& m2,
                                   const SymmetricMatrix& n1, const SymmetricMatrix& n2) {
  RequireSameDim(c1, c2, "feedback_residual");
  const int m = c1.dim();
  const Matrix& p1 = c1.phi().matrix();
  const Matrix& p2 = c2.phi().matrix();
  Matrix e(2 * m, 2 * m);
  e << p1 - m1.matrix(), -p1, -p1, c2.xi().matrix() + p1 - n2.matrix();
  Matrix f(2 * m, 2 * m);
  f << p2 - m2.matrix(), p2, p2, c1.xi().matrix() + p2 - n1.matrix();
  return {SymmetricMatrix(e), SymmetricMatrix(f)};
}

InterconnectionVerdict passivation_check(const PassivityCertificate& c1, const PassivityCertificate& c2,
                                         const Tolerance& tol) {
  RequireSameDim(c1, c2, "passivation_check");
  InterconnectionVerdict v;
  const SymmetricMatrix out_sum = c2.phi() + c1.xi();
  const double m_out = min_eigenvalue(out_sum);
  const double m_xi2 = min_eigenvalue(c2.xi());
  const double m_phi1 = min_eigenvalue(c1.phi());

  if (m_phi1 < -Bound(tol, c1.phi()) || m_xi2 < -Bound(tol, c2.xi())) {
    if (m_phi1 <= m_xi2) {
      v.margin = m_phi1;
      v.binding_condition = "Phi1 >= 0";
    } else {
      v.margin = m_xi2;
      v.binding_condition = "Xi2 >= 0";
    }
    v.satisfied = false;
    return v;
  }
  v.margin = m_out;
  v.binding_condition = "Phi2 + Xi1 >= 0";
  v.satisfied = m_out >= -Bound(tol, out_sum);
  if (!v.satisfied) return v;

  const SymmetricMatrix in_sum = c1.phi() + c2.xi();
  if (min_eigenvalue(in_sum) > Bound(tol, in_sum)) {
    const Matrix series = c2.xi().matrix() *
                          solve_checked(in_sum.matrix(), c1.phi().matrix(), "passivation_check");
    const SymmetricMatrix phi = SymmetricMatrix::SymmetricPart(series);
    v.composed = PassivityCertificate(phi, out_sum, KindFor(phi, out_sum), Provenance::Composed,
                                      StackedStorage(c1, c2));
  } else {
    v.composed = PassivityCertificate(SymmetricMatrix::Zero(c1.dim()), out_sum,
                                      KindFor(SymmetricMatrix::Zero(c1.dim()), out_sum),
                                      Provenance::Composed, StackedStorage(c1, c2));
  }
  return v;
}

double passivation_threshold(const SymmetricMatrix& xi1, const Matrix& k, double theta_max, double tol) {
  if (!(theta_max > 0.0)) throw InvalidInput("passivation_threshold: theta_max must be positive");
  const SymmetricMatrix ks = SymmetricMatrix::SymmetricPart(k);
  if (ks.dim() != xi1.dim()) throw InvalidInput("passivation_threshold: dimension mismatch");
  auto ok = [&](double theta) { return min_eigenvalue(ks * theta + xi1) >= 0.0; };
  if (ok(0.0)) return 0.0;
  if (!ok(theta_max)) return std::numeric_limits<double>::infinity();
  double lo = 0.0;
  double hi = theta_max;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

double l2_gain_bound(const PassivityCertificate& cert, const Tolerance& tol) {
  const double xi_min = min_eigenvalue(cert.xi());
  if (!(xi_min > Bound(tol, cert.xi()))) {
    throw PreconditionError("l2_gain_bound: Xi must be positive definite");
  }
  if (min_eigenvalue(cert.phi()) < -Bound(tol, cert.phi())) {
    throw PreconditionError("l2_gain_bound: Phi must be positive semidefinite");
  }
  return 1.0 / xi_min;
}

L2GainBlocks l2_gain_blocks(const PassivityCertificate& c1, const PassivityCertificate& c2) {
  RequireSameDim(c1, c2, "l2_gain_blocks");
  const int m = c1.dim();
  const Matrix id = Matrix::Identity(m, m);
  L2GainBlocks out;
  out.n.resize(2 * m, 2 * m);
  out.n << id, 2.0 * c1.phi().matrix(), -2.0 * c2.phi().matrix(), id;
  out.m = SymmetricMatrix(block_diag(c1.phi().matrix(), c2.phi().matrix()));
  out.l = SymmetricMatrix(block_diag((c1.xi() + c2.phi()).matrix(), (c2.xi() + c1.phi()).matrix()));
  out.a = min_eigenvalue(out.l);
  out.b = spectral_norm(out.n);
  out.c = spectral_norm(out.m.matrix());
  if (out.a > 0.0) {
    const double num = out.b * out.b + 2.0 * out.a * out.c;
    out.gain = std::sqrt(num) / out.a;
    out.gain_quoted = std::sqrt(num / out.a);
  } else {
    out.gain = out.gain_quoted = std::numeric_limits<double>::infinity();
  }
  return out;
}

InterconnectionVerdict l2_stability_check(const PassivityCertificate& c1, const PassivityCertificate& c2,
                                          const Tolerance& tol) {
  RequireSameDim(c1, c2, "l2_stability_check");
  const SymmetricMatrix s1 = c1.phi() + c2.xi();
  const SymmetricMatrix s2 = c2.phi() + c1.xi();
  const double m1 = min_eigenvalue(s1);
  const double m2 = min_eigenvalue(s2);
  InterconnectionVerdict v;
  if (m1 <= m2) {
    v.margin = m1;
    v.binding_condition = "Phi1 + Xi2 > 0";
  } else {
    v.margin = m2;
    v.binding_condition = "Phi2 + Xi1 > 0";
  }
  v.satisfied = m1 > Bound(tol, s1) && m2 > Bound(tol, s2);
  if (v.satisfied) v.gain_estimate = l2_gain_blocks(c1, c2).gain;
  return v;
}

InterconnectionVerdict lyapunov_stability_check(const PassivityCertificate& c1,
                                                const PassivityCertificate& c2, bool zso1, bool zso2,
                                                const Tolerance& tol) {
  RequireSameDim(c1, c2, "lyapunov_stability_check");
  InterconnectionVerdict v;
  if (!zso1 || !zso2) {
    v.satisfied = false;
    v.margin = -std::numeric_limits<double>::infinity();
    v.binding_condition = !zso1 ? "zero-state observability of subsystem 1"
                                : "zero-state observability of subsystem 2";
    return v;
  }
  const SymmetricMatrix s1 = c1.phi() + c2.xi();
  const SymmetricMatrix s2 = c2.phi() + c1.xi();
  const double m1 = min_eigenvalue(s1);
  const double m2 = min_eigenvalue(s2);
  if (m1 <= m2) {
    v.margin = m1;
    v.binding_condition = "Phi1 + Xi2 >= 0";
  } else {
    v.margin = m2;
    v.binding_condition = "Phi2 + Xi1 >= 0";
  }
  v.satisfied = m1 >= -Bound(tol, s1) && m2 >= -Bound(tol, s2);
  return v;
}

PassivationEffort passivation_effort(const SymmetricMatrix& xi1, const Tolerance& /*tol*/) {
  const EigenDecomposition ed = eig_sym(xi1);
  const double lmin = ed.values(0);
  const double lmax = ed.values(ed.values.size() - 1);
  const int m = xi1.dim();
  PassivationEffort out;
  out.phi_matrix = -xi1;
  out.phi_scalar = SymmetricMatrix::Identity(m) * (-lmin);
  out.effort_gap = out.phi_scalar - out.phi_matrix;
  out.isotropic = (lmax - lmin) <= 1e-12 * std::max(1.0, std::abs(lmin));
  return out;
}

}  // namespace passmat
