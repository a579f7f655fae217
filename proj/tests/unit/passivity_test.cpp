#include "passmat/passivity.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "passmat/errors.hpp"

namespace passmat {
namespace {

using testing::Plant;

StateSpace FirstOrder() {
  return StateSpace(Matrix::Constant(1, 1, -1), Matrix::Constant(1, 1, 1), Matrix::Constant(1, 1, 1),
                    Matrix::Zero(1, 1));
}

/// Dense-sweep oracle for min_ω λ_min(H(ω) − Φ).
double IfpMarginOracle(const StateSpace& g, const SymmetricMatrix& phi) {
  const CMatrix p = phi.matrix().cast<Complex>();
  return testing::SweepMin([&](double w) { return CMatrix(testing::HermPart(testing::DirectResponse(g, w)) - p); });
}

double OfpMarginOracle(const StateSpace& g, const SymmetricMatrix& xi) {
  const CMatrix x = xi.matrix().cast<Complex>();
  return testing::SweepMin(
      [&](double w) { return CMatrix(testing::HermPart(testing::DirectResponse(g, w).inverse()) - x); });
}

TEST(Certificate, Invariants) {
  const auto i2 = SymmetricMatrix::Identity(2);
  EXPECT_THROW(PassivityCertificate(i2, i2, CertificateKind::IFP, Provenance::Declared), InvalidInput);
  EXPECT_THROW(PassivityCertificate(i2, i2, CertificateKind::OFP, Provenance::Declared), InvalidInput);
  EXPECT_THROW(PassivityCertificate(i2, SymmetricMatrix::Zero(3), CertificateKind::IFOFP, Provenance::Declared),
               InvalidInput);
  EXPECT_THROW(PassivityCertificate(i2, i2, CertificateKind::IFOFP, Provenance::Declared, i2 * -1.0), InvalidInput);
  const auto c = PassivityCertificate::Ifp(i2);
  EXPECT_EQ(c.kind(), CertificateKind::IFP);
  EXPECT_EQ(c.xi().matrix(), Matrix::Zero(2, 2));
}

TEST(Certificate, KindAndProvenanceNamesRoundTrip) {
  for (auto k : {CertificateKind::IFP, CertificateKind::OFP, CertificateKind::IFOFP})
    EXPECT_EQ(parse_kind(to_string(k)), k);
  for (auto p : {Provenance::LmiTraceMax, Provenance::LmiMinEigMax, Provenance::FrequencySweep, Provenance::Declared,
                 Provenance::Composed})
    EXPECT_EQ(parse_provenance(to_string(p)), p);
  EXPECT_THROW(parse_kind("bogus"), InvalidInput);
}

TEST(AssembleLmi, RejectsUnstable) {
  const StateSpace g(Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1));
  EXPECT_THROW(assemble_lmi(g, CertificateKind::IFP, Principle::TraceMax), PreconditionError);
  EXPECT_THROW(compute_ifpm(g, Principle::TraceMax), PreconditionError);
}

TEST(AssembleLmi, LayoutAndEpsilon) {
  const auto lmi = assemble_lmi(Plant(), CertificateKind::OFP, Principle::MinEigMax);
  EXPECT_EQ(lmi.n, 2);
  EXPECT_EQ(lmi.m, 2);
  EXPECT_EQ(lmi.phi_offset, -1);
  EXPECT_GE(lmi.xi_offset, 0);
  EXPECT_GE(lmi.t_offset, 0);
  EXPECT_NEAR(lmi.epsilon, 1e-7 * lmi.problem.Scale(), 1e-15);
  // 3 (P) + 3 (Ξ) + 1 (t)
  EXPECT_EQ(lmi.problem.num_vars, 7);
}

TEST(LmiMatrix, MatchesExplicitBlocks) {
  auto rng = testing::Rng(41);
  const StateSpace g = testing::RandomHurwitz(3, 2, rng);
  const SymmetricMatrix p(testing::RandomSpd(3, rng));
  const SymmetricMatrix phi(testing::RandomSym(2, rng));
  const SymmetricMatrix xi(testing::RandomSym(2, rng));
  const Matrix &a = g.A(), &b = g.B(), &c = g.C(), &d = g.D();
  const Matrix &pm = p.matrix(), &ph = phi.matrix(), &x = xi.matrix();
  Matrix w(5, 5);
  w.topLeftCorner(3, 3) = pm * a + a.transpose() * pm + 2 * c.transpose() * x * c;
  w.topRightCorner(3, 2) = pm * b - c.transpose() + 2 * c.transpose() * x * d;
  w.bottomLeftCorner(2, 3) = w.topRightCorner(3, 2).transpose();
  w.bottomRightCorner(2, 2) = -(d + d.transpose()) + 2 * ph + 2 * d.transpose() * x * d;
  EXPECT_LT((lmi_matrix(g, p, phi, xi).matrix() - w).norm(), 1e-12 * w.norm());
}

TEST(ComputeIfpm, FirstOrderHasZeroIndex) {
  const auto c = compute_ifpm(FirstOrder(), Principle::TraceMax);
  EXPECT_NEAR(c.phi()(0, 0), 0.0, 1e-5);
  EXPECT_LE(c.phi()(0, 0), 1e-9);
}

TEST(ComputeIfpm, FeedthroughDominantSystem) {
  const StateSpace g(-Matrix::Identity(2, 2), 0.1 * Matrix::Identity(2, 2), 0.1 * Matrix::Ones(2, 2),
                     2.0 * Matrix::Identity(2, 2));
  for (auto pr : {Principle::TraceMax, Principle::MinEigMax}) {
    const auto c = compute_ifpm(g, pr);
    EXPECT_GE(IfpMarginOracle(g, c.phi()), -1e-6);
    EXPECT_LT((c.phi().matrix() - 2.0 * Matrix::Identity(2, 2)).norm(), 0.05);
  }
}

TEST(ComputeIfpm, LiftedIdentity) {
  const StateSpace g(-Matrix::Identity(1, 1), Matrix::Zero(1, 2), Matrix::Zero(2, 1), Matrix::Identity(2, 2));
  const auto c = compute_ifpm(g, Principle::MinEigMax);
  EXPECT_LT((c.phi().matrix() - Matrix::Identity(2, 2)).norm(), 1e-5);
  ASSERT_TRUE(c.storage().has_value());
  EXPECT_EQ(c.provenance(), Provenance::LmiMinEigMax);
}

TEST(ComputeOfpm, PlantMinEigMax) {
  const auto c = compute_ofpm(Plant(), Principle::MinEigMax);
  EXPECT_EQ(c.kind(), CertificateKind::OFP);
  EXPECT_NEAR(scalar_indices(c).xi, testing::kXiScalarRef, 2e-3);
  const auto chk = verify_certificate(Plant(), c);
  EXPECT_GE(chk.ofp_margin, -1e-6);
  EXPECT_LE(chk.ofp_margin, 5e-3);
  EXPECT_GE(OfpMarginOracle(Plant(), c.xi()), -1e-6);
}

TEST(ComputeOfpm, PlantTraceMax) {
  const auto c = compute_ofpm(Plant(), Principle::TraceMax);
  EXPECT_GE(c.xi().trace(), testing::XiTraceRef().trace() - 1e-2);
  EXPECT_NEAR(scalar_indices(c).xi, testing::kXiTraceMinEigRef, 5e-3);
  EXPECT_GE(verify_certificate(Plant(), c).margin, -1e-5);
  EXPECT_GE(OfpMarginOracle(Plant(), c.xi()), -1e-6);
}

TEST(ComputeOfpm, StorageSatisfiesLmi) {
  const auto c = compute_ofpm(Plant(), Principle::TraceMax);
  ASSERT_TRUE(c.storage().has_value());
  EXPECT_GT(min_eigenvalue(*c.storage()), 0.0);
  EXPECT_LT(max_eigenvalue(lmi_matrix(Plant(), *c.storage(), c.phi(), c.xi())), 0.0);
}

TEST(ComputeIfofp, JointCertificateVerifies) {
  auto rng = testing::Rng(42);
  const StateSpace g = testing::RandomStrictlyPassive(3, 2, rng);
  const auto c = compute_ifofp(g);
  EXPECT_EQ(c.kind(), CertificateKind::IFOFP);
  EXPECT_GE(verify_certificate(g, c).supply_margin, -1e-6);
}

TEST(ScalarIndices, Examples) {
  const auto z = scalar_indices(PassivityCertificate(SymmetricMatrix::Zero(2), SymmetricMatrix::Zero(2),
                                                     CertificateKind::IFOFP, Provenance::Declared));
  EXPECT_EQ(z.phi, 0.0);
  EXPECT_EQ(z.xi, 0.0);
  EXPECT_NEAR(scalar_indices(PassivityCertificate::Ofp(testing::XiMinEigRef())).xi, testing::kXiScalarRef, 5e-4);
  EXPECT_NEAR(scalar_indices(PassivityCertificate::Ofp(testing::XiTraceRef())).xi, testing::kXiTraceMinEigRef, 5e-4);
}

TEST(Verify, VeryNegativeIndexHasLargeMargin) {
  const auto chk = verify_certificate(Plant(), PassivityCertificate::Ifp(SymmetricMatrix::Identity(2) * -1e6));
  EXPECT_GT(chk.ifp_margin, 1e5);
  EXPECT_EQ(chk.margin, chk.ifp_margin);
}

TEST(Verify, DeliberateViolation) {
  const double w0 = 2.0;
  const double eps = 1e-3;
  const CMatrix h = testing::HermPart(testing::DirectResponse(Plant(), w0));
  const SymmetricMatrix phi(Matrix(h.real()) + eps * Matrix::Identity(2, 2));
  const auto chk = verify_certificate(Plant(), PassivityCertificate::Ifp(phi));
  EXPECT_LE(chk.ifp_margin, -eps + 1e-9);
}

TEST(Verify, SingularFeedthroughUsesSupplyRoute) {
  const auto chk = verify_certificate(FirstOrder(), PassivityCertificate::Ofp(SymmetricMatrix(Matrix::Constant(1, 1, 0.5))));
  EXPECT_TRUE(chk.ofp_via_supply);
  // 1/(s+1) is OFP(1): |G|²·(1 − ξ) ≥ 0 at ξ = 0.5 is satisfied.
  EXPECT_GE(chk.margin, -1e-12);
}

TEST(StaticIfpm, Examples) {
  const auto c = static_ifpm(0.3 * Matrix::Identity(2, 2));
  EXPECT_LT((c.phi().matrix() - 0.3 * Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_EQ(c.kind(), CertificateKind::IFP);
  EXPECT_EQ(c.provenance(), Provenance::Declared);
  EXPECT_EQ(static_ifpm(testing::K1()).phi().matrix(), testing::K1());
  Matrix skew(2, 2);
  skew << 0, 1, -1, 0;
  EXPECT_LT(static_ifpm(skew).phi().matrix().norm(), 1e-15);
}

TEST(SectorCheck, Examples) {
  const Matrix i = Matrix::Identity(2, 2);
  EXPECT_TRUE(sector_check_static(i, SymmetricMatrix::Zero(2)));
  EXPECT_FALSE(sector_check_static(i, SymmetricMatrix::Identity(2) * 2.0));
  // λ_min of K₂ from its characteristic polynomial.
  const Matrix k2 = testing::K2();
  const double tr = k2.trace(), det = k2.determinant();
  const double lmin = 0.5 * (tr - std::sqrt(tr * tr - 4 * det));
  EXPECT_TRUE(sector_check_static(k2, SymmetricMatrix::Identity(2) * lmin));
  EXPECT_FALSE(sector_check_static(k2, SymmetricMatrix::Identity(2) * (lmin + 1e-6)));
}

TEST(SectorCheck, QuadraticFormOracle) {
  auto rng = testing::Rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix k = testing::RandomMatrix(2, 2, rng);
    const SymmetricMatrix phi(testing::RandomSym(2, rng, 0.3));
    // Sample uᵀ(Ku − Φu) on the unit circle.
    double worst = 1e300;
    for (int i = 0; i < 3600; ++i) {
      const double t = 2 * M_PI * i / 3600;
      const Eigen::Vector2d u(std::cos(t), std::sin(t));
      worst = std::min(worst, u.dot(k * u - phi.matrix() * u));
    }
    if (std::abs(worst) < 1e-5) continue;
    EXPECT_EQ(sector_check_static(k, phi), worst >= 0) << trial;
  }
}

TEST(Properties, DownwardClosure) {
  auto rng = testing::Rng(44);
  const auto c = compute_ofpm(Plant(), Principle::MinEigMax);
  const double base = verify_certificate(Plant(), c).margin;
  for (int trial = 0; trial < 10; ++trial) {
    const SymmetricMatrix delta(testing::RandomSpd(2, rng, 0.0) * 0.05);
    const auto lowered = PassivityCertificate::Ofp(c.xi() - delta);
    EXPECT_GE(verify_certificate(Plant(), lowered).margin, base - 1e-12);
  }
  const auto ci = compute_ifpm(Plant(), Principle::TraceMax);
  const double base_i = verify_certificate(Plant(), ci).margin;
  for (int trial = 0; trial < 10; ++trial) {
    const SymmetricMatrix delta(testing::RandomSpd(2, rng, 0.0));
    EXPECT_GE(verify_certificate(Plant(), PassivityCertificate::Ifp(ci.phi() - delta)).margin, base_i - 1e-12);
  }
}

TEST(Properties, PrinciplesOnRandomSystems) {
  auto rng = testing::Rng(45);
  const SdpOptions sdp;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 6;
    const int m = 1 + trial % 3;
    const StateSpace g = testing::RandomHurwitz(n, m, rng);
    const auto tr = compute_ifpm(g, Principle::TraceMax);
    const auto le = compute_ifpm(g, Principle::MinEigMax);
    const double lmin_tr = min_eigenvalue(tr.phi());
    const double lmin_le = min_eigenvalue(le.phi());
    EXPECT_GE(lmin_le, lmin_tr - 1e-6) << trial;
    EXPECT_GE(tr.phi().trace(), le.phi().trace() - sdp.gap_tol * std::max(1.0, std::abs(tr.phi().trace())))
        << trial;
    const double phi_freq = scalar_index_freq(g, FrequencyGrid::Default()).value;
    EXPECT_NEAR(lmin_le, phi_freq, 2e-3) << trial;
    EXPECT_GE(verify_certificate(g, le).margin, -1e-6);
    EXPECT_GE(verify_certificate(g, tr).margin, -1e-6);
  }
}

TEST(Properties, KypCrossValidation) {
  auto rng = testing::Rng(46);
  std::uniform_real_distribution<double> shift(-0.3, 0.3);
  int agree = 0;
  int total = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + trial % 2;
    const StateSpace g = testing::RandomHurwitz(2 + trial % 3, m, rng);
    const double phi_star = scalar_index_freq(g, FrequencyGrid::Default()).value;
    const SymmetricMatrix phi = SymmetricMatrix::Identity(m) * (phi_star + shift(rng)) +
                                SymmetricMatrix(testing::RandomSym(m, rng, 0.05));
    const double freq_margin = IfpMarginOracle(g, phi);
    const bool lmi_feasible = lmi_feasibility_margin(g, phi, SymmetricMatrix::Zero(m)) > 0.0;
    ++total;
    if (lmi_feasible == (freq_margin >= -1e-6)) {
      ++agree;
    } else {
      EXPECT_LT(std::abs(freq_margin), 1e-6) << trial;
    }
  }
  EXPECT_GE(agree, total - 1);
}

}  // namespace
}  // namespace passmat
