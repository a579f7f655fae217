#include "passmat/interconnect.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "passmat/errors.hpp"
#include "interconnect_suites.hpp"

namespace passmat {
namespace {

using testing::Mat2;

SymmetricMatrix Id(double s = 1.0) { return SymmetricMatrix::Identity(2) * s; }
SymmetricMatrix Zero() { return SymmetricMatrix::Zero(2); }

PassivityCertificate Cert(const SymmetricMatrix& phi, const SymmetricMatrix& xi) {
  return PassivityCertificate(phi, xi, CertificateKind::IFOFP, Provenance::Declared);
}

TEST(Parallel, HarmonicMean) {
  const auto c = parallel_cert(PassivityCertificate::Ofp(Id()), PassivityCertificate::Ofp(Id()));
  EXPECT_LT((c.xi().matrix() - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_EQ(c.provenance(), Provenance::Composed);
}

TEST(Parallel, PhiAdds) {
  const auto c = parallel_cert(PassivityCertificate::Ifp(Mat2(1, 0, 0)), PassivityCertificate::Ifp(Mat2(0, 0, 1)));
  EXPECT_LT((c.phi().matrix() - Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_EQ(c.xi().matrix(), Matrix::Zero(2, 2));
}

TEST(Parallel, SemidefiniteDropsOutputTerm) {
  const auto c = parallel_cert(PassivityCertificate::Ofp(Id()), PassivityCertificate::Ofp(Mat2(1, 0, 0)));
  EXPECT_EQ(c.xi().matrix(), Matrix::Zero(2, 2));
  EXPECT_THROW(parallel_cert(PassivityCertificate::Ofp(Id()), PassivityCertificate::Ofp(Mat2(1, 0, -1))),
               PreconditionError);
}

TEST(Parallel, RandomSoundness) {
  const auto r = testing::ParallelSuite(101, 20);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(Feedback, ZeroMultipliers) {
  const auto c = feedback_cert(Cert(Id(), Mat2(0.3, 0.1, -0.2)), Cert(Id(), Mat2(-1, 0, 2)), Zero(), Zero());
  EXPECT_EQ(c.phi().matrix(), Matrix::Zero(4, 4));
  EXPECT_LT((c.xi().matrix().topLeftCorner(2, 2) - Mat2(0.3, 0.1, -0.2).matrix()).norm(), 1e-15);
  EXPECT_LT((c.xi().matrix().bottomRightCorner(2, 2) - Mat2(-1, 0, 2).matrix()).norm(), 1e-15);
}

TEST(Feedback, ScalarAlgebra) {
  const auto c = feedback_cert(PassivityCertificate::Ifp(Id(2)), PassivityCertificate::Ifp(Id(2)), Id(), Id());
  EXPECT_LT((c.xi().matrix() + 2.0 * Matrix::Identity(4, 4)).norm(), 1e-14);
  Matrix phi = Matrix::Identity(4, 4);
  EXPECT_LT((c.phi().matrix() - phi).norm(), 1e-15);
}

TEST(Feedback, MultiplierMustBeStrictlyBelow) {
  EXPECT_THROW(feedback_cert(PassivityCertificate::Ifp(Id()), PassivityCertificate::Ifp(Id()), Id(), Zero()),
               PreconditionError);
  const auto d = default_multipliers(PassivityCertificate::Ifp(Id(4)), PassivityCertificate::Ifp(Zero()));
  EXPECT_NEAR(d.m1(0, 0), 4.0 - 4e-3, 1e-15);
  EXPECT_NEAR(d.m2(0, 0), -1e-8, 1e-20);
  EXPECT_NO_THROW(feedback_cert(PassivityCertificate::Ifp(Id(4)), PassivityCertificate::Ifp(Zero()), d.m1, d.m2));
}

TEST(Feedback, RandomSoundness) {
  const auto r = testing::FeedbackSuite(102, 20);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(Feedback, ResidualBlocksPsd) {
  const auto r = testing::ResidualSuite(103, 200);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(Feedback, ResidualBlocksExplicit) {
  // E = [[Φ₁ − M₁, −Φ₁], [−Φ₁, Ξ₂ + Φ₁ − N₂]] assembled independently.
  const SymmetricMatrix phi1 = Mat2(1.0, 0.2, 0.5), xi2 = Mat2(-0.3, 0.0, 0.1);
  const SymmetricMatrix m1 = Mat2(0.5, 0.1, 0.2);
  const SymmetricMatrix phi2 = Id(0.7), xi1 = Id(-0.1), m2 = Id(0.6);
  const auto c1 = Cert(phi1, xi1);
  const auto c2 = Cert(phi2, xi2);
  const auto c = feedback_cert(c1, c2, m1, m2);
  const SymmetricMatrix n1(c.xi().matrix().topLeftCorner(2, 2));
  const SymmetricMatrix n2(c.xi().matrix().bottomRightCorner(2, 2));
  const auto res = feedback_residual(c1, c2, m1, m2, n1, n2);
  Matrix e(4, 4);
  e << phi1.matrix() - m1.matrix(), -phi1.matrix(), -phi1.matrix(), xi2.matrix() + phi1.matrix() - n2.matrix();
  EXPECT_LT((res.e.matrix() - e).norm(), 1e-12);
  Matrix f(4, 4);
  f << phi2.matrix() - m2.matrix(), phi2.matrix(), phi2.matrix(), xi1.matrix() + phi2.matrix() - n1.matrix();
  EXPECT_LT((res.f.matrix() - f).norm(), 1e-12);
  EXPECT_GE(testing::MinEigSym(e), -1e-12);
  EXPECT_GE(testing::MinEigSym(f), -1e-12);
}

TEST(Passivation, ExactCancellation) {
  const auto v = passivation_check(PassivityCertificate::Ofp(Id(-0.1)), PassivityCertificate::Ifp(Id(0.1)));
  EXPECT_TRUE(v.satisfied);
  EXPECT_NEAR(v.margin, 0.0, 1e-15);
  ASSERT_TRUE(v.composed.has_value());
  EXPECT_LT(v.composed->phi().matrix().norm(), 1e-15);
  EXPECT_LT(v.composed->xi().matrix().norm(), 1e-15);
}

TEST(Passivation, ReferenceMinEigOfpmThreshold) {
  const SymmetricMatrix xi = testing::XiMinEigRef();
  const double theta = -min_eigenvalue(xi);
  const auto v = passivation_check(PassivityCertificate::Ofp(xi), static_ifpm(theta * testing::K3()));
  EXPECT_NEAR(v.margin, 0.0, 1e-12);
  EXPECT_NEAR(theta, -testing::kXiScalarRef, 5e-4);
  EXPECT_NEAR(passivation_threshold(xi, testing::K3(), 1.0), theta, 1e-9);
}

TEST(Passivation, MatrixThresholdBeatsScalarForK1) {
  const SymmetricMatrix xi = testing::XiTraceRef();
  const Matrix k1 = testing::K1();
  const double matrix_theta =
      testing::BisectFirstTrue([&](double th) { return testing::MinEigSym(th * k1 + xi.matrix()) >= 0; }, 0, 1, 1e-12);
  const double scalar_theta = -testing::kXiTraceMinEigRef / testing::MinEigSym(k1);
  EXPECT_LT(matrix_theta, scalar_theta);
  EXPECT_NEAR(passivation_threshold(xi, k1, 1.0), matrix_theta, 1e-8);
}

TEST(Passivation, ThresholdMatchesBisectionOracle) {
  auto rng = testing::Rng(104);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + trial % 3;
    const Matrix xi = -testing::RandomSpd(m, rng) + 0.2 * testing::RandomSym(m, rng);
    const Matrix k = testing::RandomSpd(m, rng) + 0.3 * testing::RandomMatrix(m, m, rng);
    const Matrix ks = 0.5 * (k + k.transpose());
    if (testing::MinEigSym(ks) <= 0.05) continue;
    const double oracle =
        testing::BisectFirstTrue([&](double th) { return testing::MinEigSym(th * ks + xi) >= 0; }, 0, 100, 1e-11);
    EXPECT_NEAR(passivation_threshold(SymmetricMatrix::SymmetricPart(xi), k, 100), oracle, 1e-8);
    // Φ of θK scales linearly in θ.
    EXPECT_LT((static_ifpm(2.5 * k).phi().matrix() - 2.5 * ks).norm(), 1e-12);
  }
}

TEST(Passivation, UnreachableThresholdIsInfinite) {
  EXPECT_TRUE(std::isinf(passivation_threshold(Id(-1), Mat2(1, 0, -1).matrix(), 10.0)));
}

TEST(Passivation, ConditionsAndComposedCertificate) {
  // Φ₁ ⪰ 0 fails.
  EXPECT_FALSE(passivation_check(Cert(Id(-0.1), Id(1)), PassivityCertificate::Ifp(Id())).satisfied);
  // Ξ₂ ⪰ 0 fails.
  EXPECT_FALSE(passivation_check(PassivityCertificate::Ofp(Id(0.1)), Cert(Id(1), Id(-0.1))).satisfied);
  const SymmetricMatrix phi1 = Mat2(1, 0.2, 0.5), xi2 = Mat2(0.4, 0.1, 0.3);
  const auto v = passivation_check(Cert(phi1, Id(-0.2)), Cert(Id(0.5), xi2));
  ASSERT_TRUE(v.satisfied);
  ASSERT_TRUE(v.composed.has_value());
  const Matrix expected_phi = xi2.matrix() * (phi1.matrix() + xi2.matrix()).inverse() * phi1.matrix();
  EXPECT_LT((v.composed->phi().matrix() - 0.5 * (expected_phi + expected_phi.transpose())).norm(), 1e-12);
  EXPECT_LT((v.composed->xi().matrix() - 0.3 * Matrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(Passivation, RandomSoundness) {
  const auto r = testing::PassivationSuite(105, 20);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(SchurIdentities, RandomPairs) {
  const auto r = testing::SchurIdentitySuite(106, 50);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(L2Gain, BoundFromOfpIndex) {
  EXPECT_DOUBLE_EQ(l2_gain_bound(PassivityCertificate::Ofp(Id())), 1.0);
  EXPECT_NEAR(l2_gain_bound(PassivityCertificate::Ofp(Mat2(2, 0, 0.5))), 2.0, 1e-14);
  const auto par = parallel_cert(PassivityCertificate::Ofp(Id()), PassivityCertificate::Ofp(Id()));
  EXPECT_NEAR(l2_gain_bound(par), 2.0, 1e-14);
  EXPECT_THROW(l2_gain_bound(PassivityCertificate::Ofp(Mat2(1, 0, 0))), PreconditionError);
  EXPECT_THROW(l2_gain_bound(Cert(Id(-1), Id())), PreconditionError);
}

TEST(L2Gain, IdentityPhiBlocks) {
  const auto v = l2_stability_check(PassivityCertificate::Ifp(Id()), PassivityCertificate::Ifp(Id()));
  ASSERT_TRUE(v.satisfied);
  Matrix n(4, 4);
  n << Matrix::Identity(2, 2), 2 * Matrix::Identity(2, 2), -2 * Matrix::Identity(2, 2), Matrix::Identity(2, 2);
  const double b = Eigen::JacobiSVD<Matrix>(n).singularValues()(0);
  ASSERT_NEAR(b, std::sqrt(5.0), 1e-14);
  // a = 1, c = 1: the derived and quoted forms coincide.
  EXPECT_NEAR(*v.gain_estimate, std::sqrt(b * b + 2.0), 1e-12);
  const auto blk = l2_gain_blocks(PassivityCertificate::Ifp(Id()), PassivityCertificate::Ifp(Id()));
  EXPECT_NEAR(blk.a, 1.0, 1e-15);
  EXPECT_NEAR(blk.c, 1.0, 1e-15);
  EXPECT_NEAR(blk.gain_quoted, blk.gain, 1e-12);
}

TEST(L2Gain, GainFormulaWhenAIsNotOne) {
  const auto blk = l2_gain_blocks(PassivityCertificate::Ifp(Id(2)), PassivityCertificate::Ifp(Id(2)));
  EXPECT_NEAR(blk.a, 2.0, 1e-15);
  EXPECT_NEAR(blk.gain, std::sqrt(blk.b * blk.b + 2 * blk.a * blk.c) / blk.a, 1e-12);
  EXPECT_NEAR(blk.gain_quoted, std::sqrt((blk.b * blk.b + 2 * blk.a * blk.c) / blk.a), 1e-12);
}

TEST(L2Gain, NegativeIndexFails) {
  const auto v = l2_stability_check(PassivityCertificate::Ifp(Id(-1)), PassivityCertificate::Ifp(Id()));
  EXPECT_FALSE(v.satisfied);
  EXPECT_LT(v.margin, 0.0);
}

TEST(L2Gain, SimulatedEnergyRatios) {
  const auto r = testing::GainSuite(107, 8);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(Lyapunov, BoundaryCase) {
  const SymmetricMatrix xi1 = Mat2(-0.3, 0.1, -0.05);
  const auto v = lyapunov_stability_check(PassivityCertificate::Ofp(xi1), PassivityCertificate::Ifp(-xi1), true, true);
  EXPECT_TRUE(v.satisfied);
  EXPECT_NEAR(v.margin, 0.0, 1e-15);
}

TEST(Lyapunov, ObservabilityFlag) {
  const auto v = lyapunov_stability_check(PassivityCertificate::Ofp(Id()), PassivityCertificate::Ifp(Id()), true, false);
  EXPECT_FALSE(v.satisfied);
  EXPECT_TRUE(std::isinf(v.margin));
}

TEST(Lyapunov, ScalarConditionImpliesMatrixCondition) {
  auto rng = testing::Rng(108);
  int scalar_count = 0, matrix_count = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const SymmetricMatrix xi(testing::RandomSym(2, rng));
    const SymmetricMatrix k(testing::RandomSym(2, rng));
    const bool scalar_ok = min_eigenvalue(k) + min_eigenvalue(xi) >= 0;
    const bool matrix_ok =
        lyapunov_stability_check(PassivityCertificate::Ofp(xi), PassivityCertificate::Ifp(k), true, true).satisfied;
    if (scalar_ok) {
      EXPECT_TRUE(matrix_ok);
    }
    scalar_count += scalar_ok;
    matrix_count += matrix_ok;
  }
  EXPECT_GT(matrix_count, scalar_count);
}

TEST(Lyapunov, RandomDecrease) {
  const auto r = testing::LyapunovDecreaseSuite(109, 20);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(Effort, Examples) {
  const auto iso = passivation_effort(Id(-1));
  EXPECT_TRUE(iso.isotropic);
  EXPECT_EQ(iso.effort_gap.matrix(), Matrix::Zero(2, 2));
  const auto d = passivation_effort(Mat2(0, 0, -1));
  EXPECT_LT((d.effort_gap.matrix() - Mat2(1, 0, 0).matrix()).norm(), 1e-15);
  EXPECT_FALSE(d.isotropic);
}

TEST(Effort, IndefiniteXi) {
  const auto e = passivation_effort(testing::XiTraceRef());
  const double lmin = testing::MinEigSym(testing::XiTraceRef().matrix());
  EXPECT_LT((e.effort_gap.matrix() - (testing::XiTraceRef().matrix() - lmin * Matrix::Identity(2, 2))).norm(),
            1e-15);
  EXPECT_GE(min_eigenvalue(e.effort_gap), -1e-15);
  EXPECT_FALSE(e.isotropic);
}

TEST(Effort, ReferenceMinEigOfpm) {
  const auto e = passivation_effort(testing::XiMinEigRef());
  EXPECT_GE(min_eigenvalue(e.effort_gap), -1e-15);
  EXPECT_GT(e.effort_gap.trace(), 0.0);
  EXPECT_LT((e.phi_matrix.matrix() + testing::XiMinEigRef().matrix()).norm(), 1e-15);
}

}  // namespace
}  // namespace passmat
