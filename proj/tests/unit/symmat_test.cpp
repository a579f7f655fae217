#include "passmat/symmat.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "passmat/errors.hpp"
#include "passmat/lti.hpp"

namespace passmat {
namespace {

using testing::Mat2;
using testing::Plant;

TEST(SymmetricMatrix, RejectsAsymmetricInput) {
  Matrix m(2, 2);
  m << 1, 2, 2.001, 1;
  EXPECT_THROW(SymmetricMatrix{m}, InvalidInput);
  m(1, 0) = 2.0 + 1e-13;
  EXPECT_NO_THROW(SymmetricMatrix{m});
  EXPECT_EQ(SymmetricMatrix(m).matrix()(1, 0), SymmetricMatrix(m).matrix()(0, 1));
}

TEST(SymmetricMatrix, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(SymmetricMatrix{Matrix(0, 0)}, InvalidInput);
  Matrix m = Matrix::Identity(2, 2);
  m(0, 0) = std::nan("");
  EXPECT_THROW(SymmetricMatrix{m}, InvalidInput);
}

TEST(HermitianPart, RealSymmetrization) {
  CMatrix m(2, 2);
  m << 1, 2, 0, 1;
  const CMatrix h = hermitian_part(m).matrix();
  EXPECT_NEAR(std::abs(h(0, 0) - Complex(1)), 0, 1e-15);
  EXPECT_NEAR(std::abs(h(0, 1) - Complex(1)), 0, 1e-15);
  EXPECT_NEAR(std::abs(h(1, 0) - Complex(1)), 0, 1e-15);
  EXPECT_NEAR(std::abs(h(1, 1) - Complex(1)), 0, 1e-15);
}

TEST(HermitianPart, SkewHermitianGivesZero) {
  const CMatrix m = Complex(0, 1) * CMatrix::Identity(2, 2);
  EXPECT_LT(hermitian_part(m).matrix().norm(), 1e-15);
}

TEST(HermitianPart, PlantAtZeroMatchesDirectSolve) {
  const StateSpace g = Plant();
  // G(0) = D − C A⁻¹ B, solved independently.
  const Matrix g0 = g.D() - g.C() * g.A().fullPivLu().solve(g.B());
  const Matrix expected = 0.5 * (g0 + g0.transpose());
  const CMatrix h = hermitian_part(freq_response(g, 0.0)).matrix();
  EXPECT_LT((h - expected.cast<Complex>()).norm(), 1e-12 * expected.norm());
}

TEST(HermitianPart, NonSquareRejected) { EXPECT_THROW(hermitian_part(CMatrix(2, 3)), InvalidInput); }

TEST(HermitianPart, IdempotentAndLinear) {
  auto rng = testing::Rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix a = testing::RandomMatrix(3, 3, rng).cast<Complex>() +
                      Complex(0, 1) * testing::RandomMatrix(3, 3, rng).cast<Complex>();
    const CMatrix b = testing::RandomMatrix(3, 3, rng).cast<Complex>();
    const CMatrix ha = hermitian_part(a).matrix();
    EXPECT_LT((hermitian_part(ha).matrix() - ha).norm(), 1e-14);
    const CMatrix lin = hermitian_part(2.0 * a - 3.0 * b).matrix();
    EXPECT_LT((lin - (2.0 * ha - 3.0 * hermitian_part(b).matrix())).norm(), 1e-13);
  }
}

TEST(EigSym, DiagonalSorted) {
  const auto e = eig_sym(SymmetricMatrix::Diagonal(Vector::LinSpaced(3, 3, 1).eval()));
  EXPECT_DOUBLE_EQ(e.values(0), 1);
  EXPECT_DOUBLE_EQ(e.values(1), 2);
  EXPECT_DOUBLE_EQ(e.values(2), 3);
}

TEST(EigSym, SwapMatrix) {
  const auto e = eig_sym(Mat2(0, 1, 0));
  EXPECT_NEAR(e.values(0), -1, 1e-15);
  EXPECT_NEAR(e.values(1), 1, 1e-15);
  const double r = 1 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), r, 1e-15);
  EXPECT_NEAR(e.vectors(0, 0), -e.vectors(1, 0), 1e-15);
  EXPECT_NEAR(e.vectors(0, 1), e.vectors(1, 1), 1e-15);
}

TEST(EigSym, ReferenceMinEigOfMinEigMaxOfpm) {
  // Printed to 4 digits; the rounded entries give −0.10934.
  EXPECT_NEAR(min_eigenvalue(testing::XiMinEigRef()), testing::kXiScalarRef, 5e-4);
  EXPECT_NEAR(min_eigenvalue(testing::XiTraceRef()), testing::kXiTraceMinEigRef, 5e-4);
}

TEST(EigSym, InvariantsOnRandomMatrices) {
  auto rng = testing::Rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + trial % 6;
    const SymmetricMatrix s(testing::RandomSym(m, rng));
    const auto e = eig_sym(s);
    EXPECT_LT((e.vectors.transpose() * e.vectors - Matrix::Identity(m, m)).norm(), 1e-12);
    const Matrix rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LE((rec - s.matrix()).norm(), 1e-12 * std::max(1.0, s.matrix().norm()));
    for (int i = 1; i < m; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
  }
}

TEST(EigSym, HermitianInvariants) {
  auto rng = testing::Rng(4);
  const CMatrix a = testing::RandomMatrix(4, 4, rng).cast<Complex>() +
                    Complex(0, 1) * testing::RandomMatrix(4, 4, rng).cast<Complex>();
  const HermitianMatrix h = hermitian_part(a);
  const auto e = eig_sym(h);
  EXPECT_LT((e.vectors.adjoint() * e.vectors - CMatrix::Identity(4, 4)).norm(), 1e-12);
  const CMatrix rec = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  EXPECT_LT((rec - h.matrix()).norm(), 1e-12 * h.matrix().norm());
}

TEST(Inertia, Examples) {
  Vector d(3);
  d << 2, -3, 0;
  EXPECT_EQ(inertia(SymmetricMatrix::Diagonal(d), 1e-9), (Inertia{1, 1, 1}));
  EXPECT_EQ(inertia(SymmetricMatrix::Identity(3), 1e-9), (Inertia{3, 0, 0}));
  EXPECT_THROW(inertia(SymmetricMatrix::Identity(2), -1.0), InvalidInput);
}

TEST(Inertia, ReferenceTraceOfpmIsIndefinite) {
  // Characteristic polynomial λ² − tr·λ + det with det < 0 ⇒ one of each sign.
  const SymmetricMatrix xi = testing::XiTraceRef();
  const double det = xi(0, 0) * xi(1, 1) - xi(0, 1) * xi(0, 1);
  ASSERT_LT(det, 0);
  EXPECT_EQ(inertia(xi, 1e-9), (Inertia{1, 1, 0}));
}

TEST(Inertia, SumsToDimAndFlipsUnderNegation) {
  auto rng = testing::Rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + trial % 7;
    Matrix raw = testing::RandomSym(m, rng);
    if (trial % 3 == 0) raw.row(0).setZero(), raw.col(0).setZero();
    const SymmetricMatrix s(raw);
    const Inertia a = inertia(s, 1e-9);
    const Inertia b = inertia(-s, 1e-9);
    EXPECT_EQ(a.positive + a.negative + a.zero, m);
    EXPECT_EQ(a.positive, b.negative);
    EXPECT_EQ(a.negative, b.positive);
    EXPECT_EQ(a.zero, b.zero);
  }
}

TEST(LoewnerLeq, Examples) {
  EXPECT_TRUE(loewner_leq(SymmetricMatrix::Identity(2), SymmetricMatrix::Identity(2) * 2.0));
  const SymmetricMatrix a = Mat2(1, 0, -1);
  const SymmetricMatrix z = SymmetricMatrix::Zero(2);
  EXPECT_FALSE(loewner_leq(a, z));
  EXPECT_FALSE(loewner_leq(z, a));
  EXPECT_THROW(loewner_leq(SymmetricMatrix::Identity(2), SymmetricMatrix::Identity(3)), InvalidInput);
}

TEST(LoewnerLeq, ReferenceOfpmBelowPlantKAtOne) {
  const CMatrix g = testing::DirectResponse(Plant(), 1.0);
  const CMatrix k = testing::HermPart(g.inverse());
  const CMatrix diff = k - testing::XiMinEigRef().matrix().cast<Complex>();
  const double oracle = testing::MinEigHerm(diff);
  // The printed matrix touches K near ω = 1; its 4-digit rounding can cross by up to ~1e-4.
  EXPECT_GT(oracle, -1e-4);
  const std::vector<HermitianMatrix> samples{hermitian_part(g.inverse())};
  const auto r = is_lower_bound(testing::XiMinEigRef(), samples, 1e-9);
  EXPECT_NEAR(r.margin, oracle, 1e-12);
  EXPECT_EQ(r.is_lower_bound, oracle >= -1e-9);
}

TEST(LoewnerLeq, ReflexiveAndTransitive) {
  auto rng = testing::Rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + trial % 5;
    const SymmetricMatrix a(testing::RandomSym(m, rng));
    EXPECT_TRUE(loewner_leq(a, a));
    const SymmetricMatrix b = a + SymmetricMatrix(testing::RandomSpd(m, rng, 0.0));
    const SymmetricMatrix c = b + SymmetricMatrix(testing::RandomSpd(m, rng, 0.0));
    ASSERT_TRUE(loewner_leq(a, b));
    ASSERT_TRUE(loewner_leq(b, c));
    EXPECT_TRUE(loewner_leq(a, c));
  }
}

TEST(LoewnerLeq, ToleranceIsAbsolutePlusRelative) {
  const SymmetricMatrix a = SymmetricMatrix::Identity(2) * 1e6;
  // λ_min(B − A) = −5e−10 passes the absolute part alone.
  const SymmetricMatrix b = a - SymmetricMatrix::Diagonal(Vector::Constant(2, 5e-10));
  EXPECT_TRUE(loewner_leq(a, b));
  const SymmetricMatrix c = a - SymmetricMatrix::Diagonal(Vector::Constant(2, 5e-9));
  EXPECT_FALSE(loewner_leq(a, c));
}

TEST(SchurComplement, Identity2x2) {
  const SymmetricMatrix s = schur_complement(SymmetricMatrix::Identity(2), 1);
  ASSERT_EQ(s.dim(), 1);
  EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
}

Matrix Blocks(const Matrix& a, const Matrix& b, const Matrix& c) {
  const int p = static_cast<int>(a.rows());
  const int q = static_cast<int>(c.rows());
  Matrix m(p + q, p + q);
  m << a, b, b.transpose(), c;
  return m;
}

TEST(SchurComplement, HarmonicMeanBlockVanishes) {
  // [[Ξ₁ − N, −N], [−N, Ξ₂ − N]] with N = (Ξ₁⁻¹ + Ξ₂⁻¹)⁻¹ = I/2 for Ξᵢ = I.
  const Matrix n = 0.5 * Matrix::Identity(2, 2);
  const Matrix i = Matrix::Identity(2, 2);
  const SymmetricMatrix m(Blocks(i - n, -n, i - n));
  EXPECT_LT(schur_complement(m, 2).matrix().norm(), 1e-15);
}

TEST(SchurComplement, PassivationBlockVanishesForRandomPairs) {
  auto rng = testing::Rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + trial % 4;
    const Matrix phi1 = testing::RandomSpd(m, rng);
    const Matrix xi2 = testing::RandomSpd(m, rng);
    const Matrix s = phi1 + xi2;
    const Matrix corner = xi2 - xi2 * s.inverse() * phi1;
    const SymmetricMatrix mp(Blocks(s, -xi2, 0.5 * (corner + corner.transpose())));
    EXPECT_LT(schur_complement(mp, m).matrix().norm(), 1e-10) << "trial " << trial;
  }
}

TEST(SchurComplement, TrailingPivot) {
  auto rng = testing::Rng(8);
  const Matrix a = testing::RandomSpd(2, rng);
  const Matrix b = testing::RandomMatrix(2, 3, rng);
  const Matrix c = testing::RandomSpd(3, rng);
  const SymmetricMatrix m(Blocks(a, b, c));
  const Matrix expected = a - b * c.inverse() * b.transpose();
  EXPECT_LT((schur_complement(m, 2, SchurPivot::Trailing).matrix() - expected).norm(), 1e-12);
  const Matrix expected_lead = c - b.transpose() * a.inverse() * b;
  EXPECT_LT((schur_complement(m, 2).matrix() - expected_lead).norm(), 1e-12);
}

TEST(SchurComplement, SingularPivotRejected) {
  Vector d(3);
  d << 0, 1, 1;
  EXPECT_THROW(schur_complement(SymmetricMatrix::Diagonal(d), 1), NumericalError);
  EXPECT_THROW(schur_complement(SymmetricMatrix::Identity(2), 2), InvalidInput);
}

TEST(SchurComplement, PsdCharacterization) {
  auto rng = testing::Rng(9);
  int psd_count = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix a = testing::RandomSpd(2, rng);
    const Matrix b = testing::RandomMatrix(2, 2, rng, 0.5);
    const Matrix c = testing::RandomSym(2, rng) + 0.8 * Matrix::Identity(2, 2);
    const SymmetricMatrix m(Blocks(a, b, c));
    const bool direct = testing::MinEigSym(m.matrix()) >= 0;
    const bool via_schur = min_eigenvalue(schur_complement(m, 2)) >= 0;
    EXPECT_EQ(direct, via_schur) << "trial " << trial;
    psd_count += direct;
  }
  EXPECT_GT(psd_count, 10);
  EXPECT_LT(psd_count, 190);
}

TEST(IsLowerBound, Examples) {
  auto rng = testing::Rng(10);
  std::vector<SymmetricMatrix> samples;
  for (int i = 0; i < 5; ++i) samples.emplace_back(testing::RandomSym(3, rng));
  EXPECT_TRUE(is_lower_bound(SymmetricMatrix::Identity(3) * -100.0, samples, 1e-9).is_lower_bound);
  const auto r = is_lower_bound(samples[2] + SymmetricMatrix::Identity(3) * 1e-3, samples, 1e-9);
  double oracle = std::numeric_limits<double>::infinity();
  for (const auto& smp : samples) {
    oracle = std::min(oracle, testing::MinEigSym(smp.matrix() - samples[2].matrix()) - 1e-3);
  }
  EXPECT_FALSE(r.is_lower_bound);
  EXPECT_NEAR(r.margin, oracle, 1e-12);
  EXPECT_LE(r.margin, -1e-3 + 1e-12);
  EXPECT_THROW(is_lower_bound(SymmetricMatrix::Identity(3), std::vector<SymmetricMatrix>{}, 1e-9),
               InvalidInput);
}

TEST(IsLowerBound, ReferenceTraceOfpmAgainstPlantSweep) {
  const StateSpace g = Plant();
  std::vector<HermitianMatrix> samples;
  for (double w : FrequencyGrid::LogSpaced(1e-3, 1e4, 200).finite())
    samples.push_back(hermitian_part(testing::DirectResponse(g, w).inverse()));
  const auto r = is_lower_bound(testing::XiTraceRef(), samples, 1e-6);
  EXPECT_TRUE(r.is_lower_bound);
  EXPECT_GE(r.margin, -1e-6);
}

}  // namespace
}  // namespace passmat
