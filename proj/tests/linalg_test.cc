#include <gtest/gtest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "evpos/linalg.h"
#include "support/oracles.h"

namespace {

using evpos::Complex;
using evpos::Error;
using evpos::ErrorCode;
using evpos::Matrix;
using evpos::Vector;
namespace linalg = evpos::linalg;

TEST(Eigensystem, DiagonalMatrix) {
  Matrix a(2, 2);
  a << -1, 0, 0, -2;
  const auto eig = linalg::eigensystem(a);
  EXPECT_NEAR(eig.values(0).real(), -1.0, 1e-14);
  EXPECT_NEAR(eig.values(1).real(), -2.0, 1e-14);
  EXPECT_NEAR(std::abs(eig.right(0, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(eig.right(1, 0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(eig.left(0, 0)), 1.0, 1e-14);
}

TEST(Eigensystem, RotationHasComplexDominantPair) {
  Matrix a(2, 2);
  a << 0, 1, -1, 0;
  const auto eig = linalg::eigensystem(a);
  EXPECT_NEAR(eig.values(0).imag(), 1.0, 1e-14);
  EXPECT_NEAR(eig.values(1).imag(), -1.0, 1e-14);
  EXPECT_FALSE(eig.is_real(0, 1e-8));
  EXPECT_LT((eig.right.col(1) - eig.right.col(0).conjugate()).norm(), 1e-12);
}

TEST(Eigensystem, ReferenceMatrixMatchesCharacteristicPolynomial) {
  const Matrix a = oracle::reference_matrix();
  const auto eig = linalg::eigensystem(a);
  const auto roots = oracle::char_poly_roots(a);
  ASSERT_EQ(roots.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(eig.values(i).real(), roots[i].real(), 1e-10);
    EXPECT_NEAR(eig.values(i).imag(), roots[i].imag(), 1e-10);
  }
  EXPECT_LE(eig.residual_norm, 1e-8);
  EXPECT_NEAR(eig.values(0).real(), -0.29244, 1e-5);
  EXPECT_NEAR(eig.values(1).real(), -3.8538, 1e-4);
  EXPECT_NEAR(std::abs(eig.values(1).imag()), 8.9941, 1e-4);
}

TEST(Eigensystem, BiorthogonalReconstructionOnRandomMatrices) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 5;
    const Matrix a = oracle::random_gaussian(n, rng);
    const auto eig = linalg::eigensystem(a);
    const evpos::ComplexMatrix gram = eig.left.adjoint() * eig.right;
    EXPECT_LT((gram - evpos::ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-8);
    const evpos::ComplexMatrix rebuilt =
        eig.right * eig.values.asDiagonal() * eig.left.adjoint();
    EXPECT_LT((rebuilt - a.cast<Complex>()).norm(), 1e-7);
    for (int i = 1; i < n; ++i) {
      EXPECT_GE(eig.values(i - 1).real(), eig.values(i).real() - 1e-12);
    }
    const auto roots = oracle::char_poly_roots(a);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(eig.values(i).real(), roots[i].real(), 1e-7);
  }
}

TEST(Eigensystem, DefectiveMatrixIsRefused) {
  Matrix a(2, 2);
  a << 1, 1, 0, 1;
  try {
    linalg::eigensystem(a);
    FAIL() << "expected NotDiagonalizable";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotDiagonalizable);
  }
}

TEST(Eigensystem, NonSquareIsRefused) {
  try {
    linalg::eigensystem(Matrix::Zero(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonSquare);
  }
}

TEST(Expm, ZeroAndScalarIdentity) {
  EXPECT_LT((linalg::expm(Matrix::Zero(3, 3), 5.0) - Matrix::Identity(3, 3)).norm(), 1e-15);
  const Matrix e = linalg::expm(-Matrix::Identity(2, 2), 1.0);
  EXPECT_LT((e - std::exp(-1.0) * Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(Expm, MatchesTaylorOracle) {
  std::mt19937_64 rng(11);
  const Matrix a = oracle::random_gaussian(5, rng);
  const Matrix ours = linalg::expm(a, 0.7);
  const Matrix ref = oracle::taylor_expm(a, 0.7);
  EXPECT_LT((ours - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Expm, RelativeAccuracyUpToNormFifty) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 5;
    Matrix a = oracle::random_gaussian(n, rng);
    a *= 50.0 / (a.cwiseAbs().rowwise().sum().maxCoeff());
    // Keep the exponential in range by shifting the spectrum.
    const double shift = a.eigenvalues().real().maxCoeff();
    a -= shift * Matrix::Identity(n, n);
    const Matrix ours = linalg::expm(a, 1.0);
    const Matrix ref = oracle::taylor_expm(a, 1.0);
    EXPECT_LT((ours - ref).norm() / ref.norm(), 1e-10) << "trial " << trial;
  }
}

TEST(Expm, SemigroupProperty) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> time(0.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 6;
    const Matrix a = oracle::random_gaussian(n, rng);
    const double s = time(rng), t = time(rng);
    const Matrix lhs = linalg::expm(a, s + t);
    const Matrix rhs = linalg::expm(a, s) * linalg::expm(a, t);
    EXPECT_LT((lhs - rhs).norm(), 1e-8 * std::max(1.0, lhs.norm()));
  }
}

TEST(Expm, OverflowIsReported) {
  Matrix a = Matrix::Identity(2, 2) * 1000.0;
  try {
    linalg::expm(a, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOverflow);
  }
}

TEST(Lyapunov, MinusIdentity) {
  const Matrix q = linalg::solve_lyapunov(-Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                          linalg::LyapunovSide::kLeft);
  EXPECT_LT((q - 0.5 * Matrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(Lyapunov, Scalar) {
  const Matrix q = linalg::solve_lyapunov(Matrix::Constant(1, 1, -3.0),
                                          Matrix::Constant(1, 1, 6.0),
                                          linalg::LyapunovSide::kLeft);
  EXPECT_NEAR(q(0, 0), 1.0, 1e-15);
}

TEST(Lyapunov, MatchesQuadrature) {
  Matrix a(2, 2);
  a << -2, 1, 1, -2;
  Matrix c(1, 2);
  c << 1, 0;
  const Matrix rhs = c.transpose() * c;
  const Matrix q = linalg::solve_lyapunov(a, rhs, linalg::LyapunovSide::kLeft);
  const Matrix ref = oracle::integrate(
      [&](double t) {
        const Matrix e = oracle::taylor_expm(a, t);
        return Matrix(e.transpose() * rhs * e);
      },
      0.0, 40.0, 1e-11);
  EXPECT_LT((q - ref).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Lyapunov, ResidualAndSemidefiniteOnRandomStable) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 6;
    Matrix a = oracle::random_gaussian(n, rng);
    a -= (a.eigenvalues().real().maxCoeff() + 0.5) * Matrix::Identity(n, n);
    const Matrix c = oracle::random_gaussian(n, rng).topRows(1 + trial % 2);
    const Matrix rhs = c.transpose() * c;
    for (auto side : {linalg::LyapunovSide::kLeft, linalg::LyapunovSide::kRight}) {
      const Matrix q = linalg::solve_lyapunov(a, rhs, side);
      const Matrix res = side == linalg::LyapunovSide::kLeft
                             ? Matrix(a.transpose() * q + q * a + rhs)
                             : Matrix(a * q + q * a.transpose() + rhs);
      EXPECT_LE(res.norm(), 1e-8 * rhs.norm());
      Eigen::SelfAdjointEigenSolver<Matrix> es(q);
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
    }
  }
}

TEST(Lyapunov, UnstableIsRefused) {
  try {
    linalg::solve_lyapunov(Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                           linalg::LyapunovSide::kLeft);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotHurwitz);
  }
}

TEST(Simplex, SmallOptimum) {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6.
  linalg::LinearProgram lp;
  lp.g.resize(2, 2);
  lp.g << 1, 2, 3, 1;
  lp.h = Vector(2);
  lp.h << 4, 6;
  lp.c = Vector::Ones(2);
  const auto res = linalg::solve_lp(lp);
  ASSERT_EQ(res.status, linalg::LpStatus::kOptimal);
  EXPECT_NEAR(res.x(0), 1.6, 1e-12);
  EXPECT_NEAR(res.x(1), 1.2, 1e-12);
  EXPECT_NEAR(res.objective, 2.8, 1e-12);
  // Strong duality.
  EXPECT_NEAR(res.dual.dot(lp.h), res.objective, 1e-12);
  EXPECT_TRUE(((lp.g.transpose() * res.dual - lp.c).array() >= -1e-12).all());
}

TEST(Simplex, InfeasibleAndUnbounded) {
  linalg::LinearProgram lp;
  lp.g.resize(1, 1);
  lp.g << 1;
  lp.h = Vector::Constant(1, -1.0);
  lp.c = Vector::Ones(1);
  EXPECT_EQ(linalg::solve_lp(lp).status, linalg::LpStatus::kInfeasible);

  lp.g << -1;
  lp.h << 1;
  EXPECT_EQ(linalg::solve_lp(lp).status, linalg::LpStatus::kUnbounded);
}

TEST(StrictWitness, SymmetricMetzler) {
  Matrix a(2, 2);
  a << -2, 1, 1, -2;
  const auto w = linalg::find_strict_witness({a.transpose(), {true, true}});
  ASSERT_EQ(w.status, linalg::WitnessStatus::kFeasible);
  EXPECT_NEAR(w.x(0), 1.0, 1e-12);
  EXPECT_NEAR(w.x(1), 1.0, 1e-12);
  EXPECT_NEAR(w.margin, 1.0, 1e-12);
}

TEST(StrictWitness, UnstableScalarIsInfeasibleWithSeparatingVector) {
  const auto w = linalg::find_strict_witness({Matrix::Constant(1, 1, 1.0), {true}});
  ASSERT_EQ(w.status, linalg::WitnessStatus::kInfeasible);
  EXPECT_NEAR(w.separating.sum(), 1.0, 1e-12);
  EXPECT_LT(w.separating_residual, 1e-9);
}

TEST(StrictWitness, ReferenceMatrixFeasibleIffDominantNegative) {
  const Matrix a = oracle::reference_matrix();
  const double lambda1 = oracle::char_poly_roots(a).front().real();
  const auto w = linalg::find_strict_witness({a.transpose(), {true, true, true}});
  EXPECT_EQ(w.status == linalg::WitnessStatus::kFeasible, lambda1 < 0.0);
  const Matrix shifted = a + (lambda1 * -1.0 + 0.5) * Matrix::Identity(3, 3);
  const auto u = linalg::find_strict_witness({shifted.transpose(), {true, true, true}});
  EXPECT_EQ(u.status, linalg::WitnessStatus::kInfeasible);
}

TEST(StrictWitness, WitnessesSurviveSubstitution) {
  std::mt19937_64 rng(15);
  int feasible = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int q = 1 + trial % 5, p = 1 + (trial / 5) % 5;
    const Matrix m = oracle::random_gaussian(std::max(q, p), rng).topLeftCorner(q, p);
    std::vector<bool> positive(p);
    for (int j = 0; j < p; ++j) positive[j] = (trial + j) % 2 == 0;
    const auto w = linalg::find_strict_witness({m, positive});
    if (w.status == linalg::WitnessStatus::kFeasible) {
      ++feasible;
      EXPECT_LE((m * w.x).maxCoeff(), -w.margin / 2.0);
      for (int j = 0; j < p; ++j) {
        if (positive[j]) EXPECT_GE(w.x(j), w.margin / 2.0);
      }
    } else if (w.status == linalg::WitnessStatus::kInfeasible) {
      EXPECT_LT(w.separating_residual, 1e-8);
      EXPECT_NEAR(w.separating.sum(), 1.0, 1e-9);
      EXPECT_GE(w.separating.minCoeff(), 0.0);
    }
  }
  EXPECT_GT(feasible, 0);
}

}  // namespace
