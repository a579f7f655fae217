#include "passmat/passivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "passmat/errors.hpp"

namespace passmat {

const char* to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::IFP: return "IFP";
    case CertificateKind::OFP: return "OFP";
    case CertificateKind::IFOFP: return "IFOFP";
  }
  return "?";
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::LmiTraceMax: return "LmiTraceMax";
    case Provenance::LmiMinEigMax: return "LmiMinEigMax";
    case Provenance::FrequencySweep: return "FrequencySweep";
    case Provenance::Declared: return "Declared";
    case Provenance::Composed: return "Composed";
  }
  return "?";
}

const char* to_string(Principle p) {
  return p == Principle::TraceMax ? "TraceMax" : "MinEigMax";
}

CertificateKind parse_kind(const std::string& s) {
  for (CertificateKind k : {CertificateKind::IFP, CertificateKind::OFP, CertificateKind::IFOFP}) {
    if (s == to_string(k)) return k;
  }
  throw InvalidInput("unknown certificate kind '" + s + "'");
}

Provenance parse_provenance(const std::string& s) {
  for (Provenance p : {Provenance::LmiTraceMax, Provenance::LmiMinEigMax, Provenance::FrequencySweep,
                       Provenance::Declared, Provenance::Composed}) {
    if (s == to_string(p)) return p;
  }
  throw InvalidInput("unknown certificate provenance '" + s + "'");
}

namespace {

bool NearZero(const SymmetricMatrix& s) {
  return s.matrix().cwiseAbs().maxCoeff() <= 1e-12;
}

int SymVars(int n) { return n * (n + 1) / 2; }

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Orthonormal (svec) basis element of S^n for packed index idx, row-major
// upper triangle: off-diagonal elements carry 1/√2.
Matrix SymBasis(int n, int idx) {
  Matrix e = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (idx-- == 0) {
        const double v = i == j ? 1.0 : kInvSqrt2;
        e(i, j) = v;
        e(j, i) = v;
        return e;
      }
    }
  }
  throw InvalidInput("SymBasis: index out of range");
}

SymmetricMatrix Unpack(const Vector& x, int offset, int n) {
  Matrix s(n, n);
  int idx = offset;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = i == j ? x(idx) : kInvSqrt2 * x(idx);
      s(i, j) = v;
      s(j, i) = v;
      ++idx;
    }
  }
  return SymmetricMatrix(s);
}

// Linear part of W in (P, Φ, Ξ).
Matrix WLinear(const StateSpace& sys, const Matrix& p, const Matrix& phi, const Matrix& xi) {
  const int n = sys.states();
  const int m = sys.ports();
  const Matrix& a = sys.A();
  const Matrix& b = sys.B();
  const Matrix& c = sys.C();
  const Matrix& d = sys.D();
  Matrix w = Matrix::Zero(n + m, n + m);
  if (n > 0) {
    w.topLeftCorner(n, n) = p * a + a.transpose() * p + 2.0 * c.transpose() * xi * c;
    const Matrix off = p * b + 2.0 * c.transpose() * xi * d;
    w.topRightCorner(n, m) = off;
    w.bottomLeftCorner(m, n) = off.transpose();
  }
  w.bottomRightCorner(m, m) = 2.0 * phi + 2.0 * d.transpose() * xi * d;
  return 0.5 * (w + w.transpose());
}

Matrix WConstant(const StateSpace& sys) {
  const int n = sys.states();
  const int m = sys.ports();
  Matrix w = Matrix::Zero(n + m, n + m);
  if (n > 0) {
    w.topRightCorner(n, m) = -sys.C().transpose();
    w.bottomLeftCorner(m, n) = -sys.C();
  }
  w.bottomRightCorner(m, m) = -(sys.D() + sys.D().transpose());
  return w;
}

}  // namespace

PassivityCertificate::PassivityCertificate(SymmetricMatrix phi, SymmetricMatrix xi,
                                           CertificateKind kind, Provenance provenance,
                                           std::optional<SymmetricMatrix> storage)
    : phi_(std::move(phi)), xi_(std::move(xi)), kind_(kind), provenance_(provenance),
      storage_(std::move(storage)) {
  if (phi_.dim() != xi_.dim()) throw InvalidInput("PassivityCertificate: Φ and Ξ dimensions differ");
  if (kind_ == CertificateKind::IFP) {
    if (!NearZero(xi_)) throw InvalidInput("PassivityCertificate: IFP certificate needs Ξ = 0");
    xi_ = SymmetricMatrix::Zero(phi_.dim());
  }
  if (kind_ == CertificateKind::OFP) {
    if (!NearZero(phi_)) throw InvalidInput("PassivityCertificate: OFP certificate needs Φ = 0");
    phi_ = SymmetricMatrix::Zero(xi_.dim());
  }
  if (storage_) {
    const double bound = -1e-8 * std::max(1.0, storage_->matrix().norm());
    if (min_eigenvalue(*storage_) < bound) {
      throw InvalidInput("PassivityCertificate: storage matrix is not positive semidefinite");
    }
  }
}

PassivityCertificate PassivityCertificate::Ifp(SymmetricMatrix phi, Provenance provenance) {
  const int m = phi.dim();
  return PassivityCertificate(std::move(phi), SymmetricMatrix::Zero(m), CertificateKind::IFP, provenance);
}

PassivityCertificate PassivityCertificate::Ofp(SymmetricMatrix xi, Provenance provenance) {
  const int m = xi.dim();
  return PassivityCertificate(SymmetricMatrix::Zero(m), std::move(xi), CertificateKind::OFP, provenance);
}

SymmetricMatrix AssembledLmi::P(const Vector& x) const {
  if (n == 0) return SymmetricMatrix();
  return Unpack(x, p_offset, n);
}

SymmetricMatrix AssembledLmi::Phi(const Vector& x) const {
  return phi_offset < 0 ? SymmetricMatrix::Zero(m) : Unpack(x, phi_offset, m);
}

SymmetricMatrix AssembledLmi::Xi(const Vector& x) const {
  return xi_offset < 0 ? SymmetricMatrix::Zero(m) : Unpack(x, xi_offset, m);
}

SymmetricMatrix lmi_matrix(const StateSpace& sys, const SymmetricMatrix& p, const SymmetricMatrix& phi,
                           const SymmetricMatrix& xi) {
  const Matrix pm = sys.states() > 0 ? p.matrix() : Matrix(0, 0);
  if (pm.rows() != sys.states() || phi.dim() != sys.ports() || xi.dim() != sys.ports()) {
    throw InvalidInput("lmi_matrix: dimension mismatch");
  }
  return SymmetricMatrix::SymmetricPart(WConstant(sys) + WLinear(sys, pm, phi.matrix(), xi.matrix()));
}

AssembledLmi assemble_lmi(const StateSpace& sys, CertificateKind mode, Principle principle,
                          const LmiOptions& opts) {
  if (!is_hurwitz(sys)) throw PreconditionError("system not Hurwitz");
  AssembledLmi out;
  out.mode = mode;
  out.principle = principle;
  out.n = sys.states();
  out.m = sys.ports();
  const int n = out.n;
  const int m = out.m;
  const int np = SymVars(n);
  const int nm = SymVars(m);

  int k = 0;
  out.p_offset = 0;
  k += np;
  if (mode != CertificateKind::OFP) {
    out.phi_offset = k;
    k += nm;
  }
  if (mode != CertificateKind::IFP) {
    out.xi_offset = k;
    k += nm;
  }
  if (principle == Principle::MinEigMax) out.t_offset = k++;

  // Coefficients of −W for every variable.
  const Matrix zero_n = Matrix::Zero(n, n);
  const Matrix zero_m = Matrix::Zero(m, m);
  std::vector<Matrix> w_coeff(static_cast<std::size_t>(k), Matrix::Zero(n + m, n + m));
  for (int i = 0; i < np; ++i) {
    w_coeff[static_cast<std::size_t>(out.p_offset + i)] = -WLinear(sys, SymBasis(n, i), zero_m, zero_m);
  }
  for (int i = 0; i < nm; ++i) {
    if (out.phi_offset >= 0) {
      w_coeff[static_cast<std::size_t>(out.phi_offset + i)] = -WLinear(sys, zero_n, SymBasis(m, i), zero_m);
    }
    if (out.xi_offset >= 0) {
      w_coeff[static_cast<std::size_t>(out.xi_offset + i)] = -WLinear(sys, zero_n, zero_m, SymBasis(m, i));
    }
  }
  const Matrix w0 = -WConstant(sys);

  double scale = w0.norm();
  for (const Matrix& f : w_coeff) scale = std::max(scale, f.norm());
  scale = std::max(scale, 1.0);  // P-block and epigraph coefficients have unit-size entries
  out.epsilon = opts.eps_rel * scale;
  const double eps = out.epsilon;

  SdpProblem& prob = out.problem;
  prob.num_vars = k;
  prob.objective = Vector::Zero(k);

  // −W − εI ⪰ 0
  {
    SdpBlock blk{SymmetricMatrix::SymmetricPart(w0 - eps * Matrix::Identity(n + m, n + m)), {}};
    for (const Matrix& f : w_coeff) blk.fi.push_back(SymmetricMatrix::SymmetricPart(f));
    prob.blocks.push_back(std::move(blk));
  }
  // P − εI ⪰ 0
  if (n > 0) {
    SdpBlock blk{SymmetricMatrix::SymmetricPart(-eps * Matrix::Identity(n, n)), {}};
    for (int v = 0; v < k; ++v) {
      const bool is_p = v >= out.p_offset && v < out.p_offset + np;
      blk.fi.push_back(is_p ? SymmetricMatrix(SymBasis(n, v - out.p_offset)) : SymmetricMatrix::Zero(n));
    }
    prob.blocks.push_back(std::move(blk));
  }
  // Epigraph blocks Φ − tI ⪰ 0 and/or Ξ − tI ⪰ 0.
  if (principle == Principle::MinEigMax) {
    for (int offset : {out.phi_offset, out.xi_offset}) {
      if (offset < 0) continue;
      SdpBlock blk{SymmetricMatrix::Zero(m), {}};
      for (int v = 0; v < k; ++v) {
        if (v >= offset && v < offset + nm) {
          blk.fi.push_back(SymmetricMatrix(SymBasis(m, v - offset)));
        } else if (v == out.t_offset) {
          blk.fi.push_back(SymmetricMatrix::SymmetricPart(-Matrix::Identity(m, m)));
        } else {
          blk.fi.push_back(SymmetricMatrix::Zero(m));
        }
      }
      prob.blocks.push_back(std::move(blk));
    }
  }

  // Objective: traces (diagonal basis elements), plus t for MinEigMax.
  const double trace_weight = principle == Principle::MinEigMax ? opts.secondary_weight : 1.0;
  auto add_trace = [&](int offset, double w) {
    int idx = offset;
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        if (i == j) prob.objective(idx) += w;
        ++idx;
      }
    }
  };
  const bool joint = mode == CertificateKind::IFOFP;
  if (out.phi_offset >= 0) add_trace(out.phi_offset, trace_weight * (joint ? opts.w_phi : 1.0));
  if (out.xi_offset >= 0) add_trace(out.xi_offset, trace_weight * (joint ? opts.w_xi : 1.0));
  if (out.t_offset >= 0) prob.objective(out.t_offset) = 1.0;

  if (joint) {
    Vector lo = Vector::Constant(k, -std::numeric_limits<double>::infinity());
    Vector hi = Vector::Constant(k, std::numeric_limits<double>::infinity());
    for (int offset : {out.phi_offset, out.xi_offset}) {
      lo.segment(offset, nm).setConstant(-opts.ifofp_box);
      hi.segment(offset, nm).setConstant(opts.ifofp_box);
    }
    prob.lower = lo;
    prob.upper = hi;
  }
  return out;
}

namespace {

PassivityCertificate SolveLmi(const StateSpace& sys, CertificateKind mode, Principle principle,
                              const LmiOptions& opts) {
  const AssembledLmi lmi = assemble_lmi(sys, mode, principle, opts);
  const SdpSolution sol = solve(lmi.problem, opts.sdp);
  if (sol.status == SdpStatus::Infeasible) {
    throw InfeasibleError("no finite passivity matrix at requested epsilon (" + sol.message + ")");
  }
  if (sol.status != SdpStatus::Optimal) {
    std::ostringstream os;
    os << "SDP solver returned " << to_string(sol.status) << " after " << sol.iterations
       << " iterations: " << sol.message;
    throw NumericalError(os.str());
  }
  std::optional<SymmetricMatrix> storage;
  if (lmi.n > 0) storage = lmi.P(sol.x);
  const Provenance prov =
      principle == Principle::TraceMax ? Provenance::LmiTraceMax : Provenance::LmiMinEigMax;
  PassivityCertificate cert(lmi.Phi(sol.x), lmi.Xi(sol.x), mode, prov, std::move(storage));
  if (opts.verify) {
    const CertificateCheck check = verify_certificate(sys, cert);
    if (check.margin < -1e-6) {
      std::ostringstream os;
      os << "LMI certificate fails the frequency-domain check (margin " << check.margin << " at omega "
         << check.worst_omega << ")";
      throw NumericalError(os.str());
    }
  }
  return cert;
}

}  // namespace

PassivityCertificate compute_ifpm(const StateSpace& sys, Principle principle, const LmiOptions& opts) {
  return SolveLmi(sys, CertificateKind::IFP, principle, opts);
}

PassivityCertificate compute_ofpm(const StateSpace& sys, Principle principle, const LmiOptions& opts) {
  return SolveLmi(sys, CertificateKind::OFP, principle, opts);
}

PassivityCertificate compute_ifofp(const StateSpace& sys, const LmiOptions& opts, Principle principle) {
  return SolveLmi(sys, CertificateKind::IFOFP, principle, opts);
}

ScalarIndices scalar_indices(const PassivityCertificate& cert) {
  return {min_eigenvalue(cert.phi()), min_eigenvalue(cert.xi())};
}

CertificateCheck verify_certificate(const StateSpace& sys, const PassivityCertificate& cert,
                                    const FrequencyGrid& grid) {
  if (cert.dim() != sys.ports()) throw InvalidInput("verify_certificate: dimension mismatch");
  const HermitianMatrix phi(cert.phi());
  const CMatrix xi = cert.xi().matrix().cast<Complex>();
  CertificateCheck out;

  const SweepMinimum ifp =
      sweep_min_eigenvalue([&](double w) { return ifpm_sample(sys, w) - phi; }, grid);
  out.ifp_margin = ifp.value;

  const SweepMinimum supply = sweep_min_eigenvalue(
      [&](double w) {
        const CMatrix g = freq_response(sys, w);
        return hermitian_part(g) - phi - hermitian_part(g.adjoint() * xi * g);
      },
      grid);
  out.supply_margin = supply.value;

  SweepMinimum ofp;
  const bool d_invertible = Eigen::JacobiSVD<Matrix>(sys.D()).singularValues().minCoeff() *
                                kCondMax >= Eigen::JacobiSVD<Matrix>(sys.D()).singularValues().maxCoeff();
  if (d_invertible) {
    try {
      const HermitianMatrix xi_h(cert.xi());
      ofp = sweep_min_eigenvalue([&](double w) { return ofpm_sample(sys, w) - xi_h; }, grid);
      out.ofp_margin = ofp.value;
    } catch (const NumericalError&) {
      out.ofp_via_supply = true;
    }
  } else {
    out.ofp_via_supply = true;
  }
  if (out.ofp_via_supply) out.ofp_margin = std::numeric_limits<double>::quiet_NaN();

  const SweepMinimum* binding = &supply;
  switch (cert.kind()) {
    case CertificateKind::IFP: binding = &ifp; break;
    case CertificateKind::OFP: binding = out.ofp_via_supply ? &supply : &ofp; break;
    case CertificateKind::IFOFP: binding = &supply; break;
  }
  out.margin = binding->value;
  out.worst_omega = binding->omega;
  out.worst_direction = binding->direction;
  return out;
}

PassivityCertificate static_ifpm(const Matrix& k) {
  return PassivityCertificate::Ifp(SymmetricMatrix::SymmetricPart(k), Provenance::Declared);
}

bool sector_check_static(const Matrix& k, const SymmetricMatrix& phi, const Tolerance& tol) {
  return loewner_leq(phi, SymmetricMatrix::SymmetricPart(k), tol);
}

double lmi_feasibility_margin(const StateSpace& sys, const SymmetricMatrix& phi, const SymmetricMatrix& xi,
                              const SdpOptions& opts) {
  const int n = sys.states();
  const int m = sys.ports();
  if (phi.dim() != m || xi.dim() != m) throw InvalidInput("lmi_feasibility_margin: dimension mismatch");
  const Matrix w_fixed = WConstant(sys) + WLinear(sys, Matrix::Zero(n, n), phi.matrix(), xi.matrix());
  if (n == 0) return std::min(1.0, min_eigenvalue(SymmetricMatrix::SymmetricPart(-w_fixed)));

  const int np = SymVars(n);
  const int k = np + 1;  // P entries, then s
  SdpProblem prob;
  prob.num_vars = k;
  prob.objective = Vector::Zero(k);
  prob.objective(np) = 1.0;

  SdpBlock w_blk{SymmetricMatrix::SymmetricPart(-w_fixed), {}};
  SdpBlock p_blk{SymmetricMatrix::Zero(n), {}};
  for (int i = 0; i < np; ++i) {
    w_blk.fi.push_back(SymmetricMatrix::SymmetricPart(
        -WLinear(sys, SymBasis(n, i), Matrix::Zero(m, m), Matrix::Zero(m, m))));
    p_blk.fi.push_back(SymmetricMatrix(SymBasis(n, i)));
  }
  w_blk.fi.push_back(SymmetricMatrix::SymmetricPart(-Matrix::Identity(n + m, n + m)));
  p_blk.fi.push_back(SymmetricMatrix::SymmetricPart(-Matrix::Identity(n, n)));
  prob.blocks.push_back(std::move(w_blk));
  prob.blocks.push_back(std::move(p_blk));
  prob.upper = Vector::Constant(k, std::numeric_limits<double>::infinity());
  (*prob.upper)(np) = 1.0;

  const SdpSolution sol = solve(prob, opts);
  if (sol.status != SdpStatus::Optimal) {
    throw NumericalError(std::string("lmi_feasibility_margin: SDP ") + to_string(sol.status) + ": " +
                         sol.message);
  }
  return sol.x(np);
}

}  // namespace passmat
