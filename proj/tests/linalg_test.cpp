#include "qdual/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"

namespace qdual {
namespace {

using test::RandomPsd;
using test::RandomSym;
using test::RandomVector;
using test::ToEigen;

constexpr double kTight = 1e-13;

TEST(SymMatrix, SymmetrizesOnConstruction) {
  SymMatrix m = SymMatrix::FromRows({{1.0, 2.0}, {4.0, 5.0}});
  EXPECT_EQ(m(0, 1), 3.0);
  EXPECT_EQ(m(1, 0), 3.0);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 50; ++t) {
    std::vector<Vector> rows(4, Vector(4));
    for (auto& r : rows) r = RandomVector(rng, 4);
    SymMatrix s = SymMatrix::FromRows(rows);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) ASSERT_EQ(s(i, j), s(j, i));
    }
  }
}

TEST(SymMatrix, RejectsEmptyAndRagged) {
  EXPECT_THROW(SymMatrix(0), Error);
  EXPECT_THROW(SymMatrix::FromRows({{1.0, 2.0}, {3.0}}), Error);
}

TEST(EigSym, IdentityHasUnitEigenvalues) {
  EigenDecomposition e = EigSym(SymMatrix::Identity(2));
  EXPECT_EQ(e.values[0], 1.0);
  EXPECT_EQ(e.values[1], 1.0);
}

TEST(EigSym, SwapMatrixHasPlusMinusOne) {
  EigenDecomposition e = EigSym({{0.0, 1.0}, {1.0, 0.0}});
  EXPECT_NEAR(e.values[0], -1.0, kTight);
  EXPECT_NEAR(e.values[1], 1.0, kTight);
}

TEST(EigSym, TraceDeterminantTwoByTwo) {
  // trace 3, determinant 1
  EigenDecomposition e = EigSym({{1.0, 1.0}, {1.0, 2.0}});
  EXPECT_NEAR(e.values[0], (3.0 - std::sqrt(5.0)) / 2.0, kTight);
  EXPECT_NEAR(e.values[1], (3.0 + std::sqrt(5.0)) / 2.0, kTight);
  EXPECT_GT(e.values[0], 0.0);
}

TEST(EigSym, OneByOne) {
  EigenDecomposition e = EigSym({{-4.5}});
  EXPECT_EQ(e.values[0], -4.5);
  EXPECT_EQ(std::abs(e.vectors(0, 0)), 1.0);
}

TEST(EigSym, RandomReconstructionAndOrthogonality) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 12;
    SymMatrix m = RandomSym(rng, n, 3.0);
    EigenDecomposition e = EigSym(m);
    const Eigen::MatrixXd v = [&] {
      Eigen::MatrixXd out(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out(i, j) = e.vectors(i, j);
      }
      return out;
    }();
    const Eigen::MatrixXd w = test::ToEigen(e.values).asDiagonal();
    const Eigen::MatrixXd ref = ToEigen(m);
    const double norm = test::Eigenvalues(ref).cwiseAbs().maxCoeff();
    EXPECT_LE((v * w * v.transpose() - ref).norm(), 1e-10 * n * norm);
    EXPECT_LE((ref * v - v * w).norm(), 1e-12 * n * std::max(norm, 1.0) * 10);
    EXPECT_LE((v.transpose() * v - Eigen::MatrixXd::Identity(n, n)).norm(), 1e-10 * n);
    for (std::size_t k = 1; k < n; ++k) EXPECT_LE(e.values[k - 1], e.values[k]);
    const Eigen::VectorXd expected = test::Eigenvalues(ref);
    for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(e.values[k], expected(k), 1e-11 * n * norm);
  }
}

TEST(EigSym, RepeatedEigenvalues) {
  // Q diag(2, 2, -1) Q^T for a rotation Q
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(3, 3))
                          .householderQ();
  Eigen::MatrixXd a = q * Eigen::Vector3d(2, 2, -1).asDiagonal() * q.transpose();
  std::vector<Vector> rows(3, Vector(3));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) rows[i][j] = a(i, j);
  }
  EigenDecomposition e = EigSym(SymMatrix::FromRows(rows));
  EXPECT_NEAR(e.values[0], -1.0, 1e-12);
  EXPECT_NEAR(e.values[1], 2.0, 1e-12);
  EXPECT_NEAR(e.values[2], 2.0, 1e-12);
}

TEST(ClassifyDefiniteness, Examples) {
  EXPECT_EQ(ClassifyDefiniteness(SymMatrix{{2.0, 1.0}, {1.0, 2.0}}).cls, DefinitenessClass::kPosDef);
  EXPECT_EQ(ClassifyDefiniteness(SymMatrix{{1.0, 1.0}, {1.0, 1.0}}).cls,
            DefinitenessClass::kPosSemiDefSingular);
  EXPECT_EQ(ClassifyDefiniteness(SymMatrix{{0.0, 1.0}, {1.0, 0.0}}).cls, DefinitenessClass::kIndefinite);
  EXPECT_EQ(ClassifyDefiniteness(SymMatrix{{-2.0, 1.0}, {1.0, -2.0}}).cls, DefinitenessClass::kNegDef);
  EXPECT_EQ(ClassifyDefiniteness(SymMatrix{{-1.0, 1.0}, {1.0, -1.0}}).cls,
            DefinitenessClass::kNegSemiDefSingular);
  EXPECT_EQ(ClassifyDefiniteness(SymMatrix(3)).cls, DefinitenessClass::kPosSemiDefSingular);
}

TEST(ClassifyDefiniteness, ToleranceBandIsRelative) {
  // 1e-10 is inside the zero band of a matrix whose largest eigenvalue is 1.
  EXPECT_EQ(ClassifyDefiniteness(SymMatrix{{1.0, 0.0}, {0.0, 1e-10}}).cls,
            DefinitenessClass::kPosSemiDefSingular);
  EXPECT_EQ(ClassifyDefiniteness(SymMatrix{{1.0, 0.0}, {0.0, 1e-8}}).cls, DefinitenessClass::kPosDef);
  // Scaled by 1e6 the band widens to 1e-3.
  EXPECT_EQ(ClassifyDefiniteness(SymMatrix{{1e6, 0.0}, {0.0, 1e-4}}).cls,
            DefinitenessClass::kPosSemiDefSingular);
  EXPECT_EQ(ClassifyDefiniteness(SymMatrix{{1.0, 0.0}, {0.0, -1e-10}}).cls,
            DefinitenessClass::kPosSemiDefSingular);
}

TEST(ClassifyDefiniteness, MatchesReferenceEigenvaluesOnRandomMatrices) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + t % 6;
    SymMatrix m = t % 3 == 0 ? RandomPsd(rng, n, 1 + t % n) : RandomSym(rng, n);
    const Eigen::VectorXd w = test::Eigenvalues(ToEigen(m));
    const double tau = 1e-9 * std::max(1.0, w.cwiseAbs().maxCoeff());
    const double lo = w.minCoeff();
    const double hi = w.maxCoeff();
    DefinitenessClass expected;
    if (lo > tau) {
      expected = DefinitenessClass::kPosDef;
    } else if (hi < -tau) {
      expected = DefinitenessClass::kNegDef;
    } else if (lo >= -tau) {
      expected = DefinitenessClass::kPosSemiDefSingular;
    } else if (hi <= tau) {
      expected = DefinitenessClass::kNegSemiDefSingular;
    } else {
      expected = DefinitenessClass::kIndefinite;
    }
    EXPECT_EQ(ClassifyDefiniteness(m).cls, expected) << "trial " << t;
  }
}

TEST(SolveMinNorm, InvertibleSystem) {
  MinNormSolution s = SolveMinNorm({{1.0, 1.0}, {1.0, 2.0}}, Vector{0.0, -1.0});
  EXPECT_NEAR(s.x[0], 1.0, kTight);
  EXPECT_NEAR(s.x[1], -1.0, kTight);
  EXPECT_NEAR(s.residual, 0.0, kTight);
}

TEST(SolveMinNorm, ZeroMatrix) {
  MinNormSolution s = SolveMinNorm(SymMatrix(2), Vector{0.0, 0.0});
  EXPECT_EQ(s.x, (Vector{0.0, 0.0}));
  EXPECT_EQ(s.residual, 0.0);
}

TEST(SolveMinNorm, SingularConsistent) {
  MinNormSolution s = SolveMinNorm({{1.0, 1.0}, {1.0, 1.0}}, Vector{1.0, 1.0});
  EXPECT_NEAR(s.x[0], 0.5, kTight);
  EXPECT_NEAR(s.x[1], 0.5, kTight);
  EXPECT_NEAR(s.residual, 0.0, kTight);
}

TEST(SolveMinNorm, InconsistentReportsResidual) {
  MinNormSolution s = SolveMinNorm({{1.0, 1.0}, {1.0, 1.0}}, Vector{1.0, -1.0});
  EXPECT_NEAR(s.x[0], 0.0, kTight);
  EXPECT_NEAR(s.x[1], 0.0, kTight);
  EXPECT_NEAR(s.residual, std::sqrt(2.0), kTight);
}

TEST(SolveMinNorm, MatchesPseudoInverseAndIsOrthogonalToKernel) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 6;
    const std::size_t rank = 1 + t % (n - 1);
    SymMatrix m = RandomPsd(rng, n, rank);
    Vector rhs = RandomVector(rng, n);
    MinNormSolution s = SolveMinNorm(m, rhs);
    const Eigen::MatrixXd ref = ToEigen(m);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ref);
    cod.setThreshold(1e-9);
    const Eigen::VectorXd expected = cod.pseudoInverse() * ToEigen(rhs);
    EXPECT_LE((ToEigen(s.x) - expected).norm(), 1e-7 * (1.0 + expected.norm())) << "trial " << t;
    EXPECT_NEAR(s.residual, (ref * ToEigen(s.x) - ToEigen(rhs)).norm(), 1e-10);
    const EigenDecomposition e = EigSym(m);
    const Matrix kernel = KernelBasis(e);
    EXPECT_EQ(kernel.cols(), n - rank);
    for (std::size_t k = 0; k < kernel.cols(); ++k) {
      EXPECT_LE(std::abs(Dot(kernel.Column(k), s.x)), 1e-8);
    }
  }
}

TEST(InRange, Examples) {
  EXPECT_TRUE(InRange({{1.0, 1.0}, {1.0, 2.0}}, Vector{5.0, -3.0}));
  EXPECT_FALSE(InRange({{1.0, 1.0}, {1.0, 1.0}}, Vector{1.0, -1.0}));
  EXPECT_TRUE(InRange({{1.0, 1.0}, {1.0, 1.0}}, Vector{2.0, 2.0}));
  EXPECT_TRUE(InRange(SymMatrix(2), Vector{0.0, 0.0}));
  EXPECT_FALSE(InRange(SymMatrix(2), Vector{0.0, 1e-3}));
}

TEST(InRange, InvertibleAlwaysTrue) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + t % 5;
    SymMatrix m = RandomPsd(rng, n, n);
    m.AddScaled(SymMatrix::Identity(n), 0.5);
    EXPECT_TRUE(InRange(m, RandomVector(rng, n, 10.0)));
  }
}

// Range(A + B) = Range(A) + Range(B) for PSD A, B.
TEST(InRange, RangeAdditivityForPsdPairs) {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 5;
    SymMatrix a = RandomPsd(rng, n, 1 + rng() % (n - 1));
    SymMatrix b = RandomPsd(rng, n, 1 + rng() % (n - 1));
    SymMatrix sum = a + b;
    Vector v = RandomVector(rng, n);
    EXPECT_TRUE(InRange(sum, Add(a.Apply(v), b.Apply(v))));
    // u in Range(A + B) splits into its projections onto Range(A), Range(B).
    Vector u = sum.Apply(RandomVector(rng, n));
    ASSERT_TRUE(InRange(sum, u));
    Vector w = SolveMinNorm(sum, u).x;
    Vector ua = a.Apply(w);
    Vector ub = b.Apply(w);
    EXPECT_TRUE(InRange(a, ua));
    EXPECT_TRUE(InRange(b, ub));
    EXPECT_LE(Norm2(Subtract(Add(ua, ub), u)), 1e-9 * (1.0 + Norm2(u)));
  }
}

TEST(RangeBasis, ComplementsKernel) {
  std::mt19937_64 rng(23);
  SymMatrix m = RandomPsd(rng, 5, 2);
  EigenDecomposition e = EigSym(m);
  EXPECT_EQ(RangeBasis(e).cols(), 2u);
  EXPECT_EQ(KernelBasis(e).cols(), 3u);
}

}  // namespace
}  // namespace qdual
