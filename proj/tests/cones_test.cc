#include <gtest/gtest.h>

#include <limits>
#include <random>

#include <Eigen/LU>

#include "evpos/cones.h"
#include "evpos/spectral.h"
#include "support/oracles.h"

namespace {

using evpos::Matrix;
using evpos::Vector;
namespace cones = evpos::cones;
namespace spectral = evpos::spectral;

spectral::SpectralVerdict reference_verdict() {
  return spectral::classify_system(oracle::reference_matrix());
}

TEST(Cone, DominantVectorIsOnTheAxis) {
  const auto v = reference_verdict();
  const auto cone = cones::make_uniform_cone(v, 1.0);
  const auto m = cones::cone_contains(cone, v.dominant_right);
  EXPECT_TRUE(m.contained);
  EXPECT_NEAR(m.margin, 1.0, 1e-10);
  EXPECT_FALSE(cones::cone_contains(cone, -v.dominant_right).contained);
}

TEST(Cone, QuadraticMarginMatchesDefinition) {
  // Rebuild the quadratic form from the library eigenvectors without the
  // transform rows.
  const auto v = reference_verdict();
  const Vector alpha = (Vector(2) << 0.7, 0.3).finished();
  const auto cone = cones::make_cone(v, alpha);
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    Vector y(3);
    for (int i = 0; i < 3; ++i) y(i) = g(rng);
    const double head = v.dominant_left.dot(y);
    double tail = 0.0;
    for (int i = 1; i < 3; ++i) {
      tail += alpha(i - 1) * std::norm(v.eig.left.col(i).dot(y.cast<evpos::Complex>()));
    }
    EXPECT_NEAR(cones::quadratic_margin(cone, y), head * head - tail,
                1e-8 * (1.0 + y.squaredNorm()))
        << "trial " << trial;
  }
}

TEST(Cone, WrongAlphaLengthAndSign) {
  const auto v = reference_verdict();
  EXPECT_THROW(cones::make_cone(v, Vector::Ones(3)), evpos::Error);
  EXPECT_THROW(cones::make_cone(v, -Vector::Ones(2)), evpos::Error);
}

TEST(Cone, RotationHasNoCone) {
  Matrix a(2, 2);
  a << 0, 1, -1, 0;
  const auto v = spectral::classify_system(a);
  try {
    cones::make_uniform_cone(v, 1.0);
    FAIL();
  } catch (const evpos::Error& e) {
    EXPECT_EQ(e.code(), evpos::ErrorCode::kPreconditionFailed);
  }
  EXPECT_THROW(cones::fit_inner_cone(v), evpos::Error);
  EXPECT_THROW(cones::fit_outer_cone(v), evpos::Error);
}

TEST(Fit, SymmetricMetzlerBothFound) {
  Matrix a(2, 2);
  a << -2, 1, 1, -2;
  const auto v = spectral::classify_system(a);
  EXPECT_TRUE(cones::fit_inner_cone(v).found);
  EXPECT_TRUE(cones::fit_outer_cone(v).found);
}

TEST(Cone, NestingIsMonotone) {
  const auto v = reference_verdict();
  std::mt19937_64 rng(38);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    Vector y(3);
    for (int i = 0; i < 3; ++i) y(i) = g(rng);
    double previous = -std::numeric_limits<double>::infinity();
    for (double s : {4.0, 2.0, 1.0, 0.5, 0.25}) {
      const double m = cones::cone_contains(cones::make_uniform_cone(v, s), y).margin;
      EXPECT_GE(m, previous - 1e-12);
      previous = m;
    }
  }
}

TEST(Cone, DualTestIsSound) {
  const auto v = reference_verdict();
  const auto fit = cones::fit_inner_cone(v);
  ASSERT_TRUE(fit.found);
  for (double s : {fit.s, 2.0 * fit.s}) {
    const auto cone = cones::make_uniform_cone(v, s);
    const Vector margins = cones::inner_margins(cone);
    std::mt19937_64 rng(39);
    for (int j = 0; j < 3; ++j) {
      if (margins(j) <= 0.0) continue;
      double lowest = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 10000; ++k) {
        Vector y = cones::sample_cone_point(cone, rng, k % 2 == 0 ? 1.0 : -1.0);
        y.normalize();
        lowest = std::min(lowest, y(j));
      }
      EXPECT_GE(lowest, -1e-8) << "j=" << j;
    }
  }
}

TEST(Cone, SampledPointsAreInside) {
  const auto v = reference_verdict();
  const auto cone = cones::make_uniform_cone(v, 2.0);
  std::mt19937_64 rng(32);
  for (int i = 0; i < 200; ++i) {
    const Vector y = cones::sample_cone_point(cone, rng);
    EXPECT_NEAR(v.dominant_left.dot(y), 1.0, 1e-10);
    EXPECT_GE(cones::cone_contains(cone, y).margin, -1e-10);
  }
  const Vector edge = cones::sample_cone_point(cone, rng, 1.0);
  EXPECT_NEAR(cones::cone_contains(cone, edge).margin, 0.0, 1e-9);
}

TEST(Cone, FlowInvarianceOnReferenceMatrix) {
  const Matrix a = oracle::reference_matrix();
  const auto v = spectral::classify_system(a);
  for (double s : {0.1, 1.0, 10.0}) {
    const auto cone = cones::make_uniform_cone(v, s);
    const auto r = cones::flow_invariance_check(a, cone, 100, 5.0, 33);
    EXPECT_TRUE(r.passed()) << "s=" << s;
    EXPECT_EQ(r.points, 100);
  }
}

TEST(Cone, FlowInvarianceDetectsEscape) {
  const Matrix a = oracle::reference_matrix();
  const auto v = spectral::classify_system(a);
  const auto cone = cones::make_uniform_cone(v, 1.0);
  // Feed the flow of -A: the cone is not invariant backwards in time.
  const auto r = cones::flow_invariance_check(Matrix(-a), cone, 50, 2.0, 34);
  EXPECT_FALSE(r.passed());
}

TEST(Fit, InnerConeLiesInOrthantAndOrthantInOuterCone) {
  const auto v = reference_verdict();
  const auto inner = cones::fit_inner_cone(v);
  const auto outer = cones::fit_outer_cone(v);
  ASSERT_TRUE(inner.found);
  ASSERT_TRUE(outer.found);
  EXPECT_GT(inner.s, outer.s);

  std::mt19937_64 rng(35);
  const auto inner_cone = cones::make_uniform_cone(v, inner.s);
  for (int i = 0; i < 500; ++i) {
    const Vector y = cones::sample_cone_point(inner_cone, rng, i % 2 == 0 ? 1.0 : -1.0);
    EXPECT_GT(y.minCoeff(), 0.0);
  }
  const auto outer_cone = cones::make_uniform_cone(v, outer.s);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    Vector x(3);
    for (int j = 0; j < 3; ++j) x(j) = unit(rng);
    EXPECT_TRUE(cones::cone_contains(outer_cone, x, 0.0).contained);
  }
  for (int j = 0; j < 3; ++j) {
    EXPECT_GT(cones::cone_contains(outer_cone, Vector::Unit(3, j), 0.0).margin, 0.0);
  }
}

TEST(Fit, ZeroEntryInDominantVectorHasNoInnerCone) {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = -1.0;
  a.bottomRightCorner(2, 2) << -3, -1, -1, -3;
  const auto v = spectral::classify_system(a);
  ASSERT_TRUE(v.simple_real_dominant);
  EXPECT_FALSE(cones::fit_inner_cone(v).found);
}

TEST(Attractor, TrajectoriesApproachDominantRay) {
  const Matrix a = oracle::reference_matrix();
  const auto v = spectral::classify_system(a);
  const auto cone = cones::make_uniform_cone(v, 1.0);
  std::mt19937_64 rng(36);
  std::vector<Vector> points;
  for (int i = 0; i < 20; ++i) points.push_back(cones::sample_cone_point(cone, rng));
  const auto r = cones::attractor_limit_check(a, cone, points, 20.0);
  EXPECT_TRUE(r.all_monotone);
  EXPECT_LT(r.worst_final_angle, 1e-6);
}

TEST(Transform, IdentitiesOnRandomPairs) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> pos(0.1, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 8;
    Vector v(n), w(n);
    for (int i = 0; i < n; ++i) {
      v(i) = pos(rng);
      w(i) = pos(rng);
    }
    const auto t = cones::positivizing_transform(v, w);
    const Vector wn = w / w.dot(v);
    EXPECT_LE((t.s * Vector::Ones(n) - v).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((wn.transpose() * t.s - Vector::Constant(n, 1.0 / n).transpose())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-10);
    EXPECT_LT(t.condition_number, 1e12);
  }
}

TEST(Transform, ConjugationMovesDominantVectorsToOnes) {
  const Matrix a = oracle::reference_matrix();
  const auto v = spectral::classify_system(a);
  const auto t = cones::positivizing_transform(v.dominant_right, v.dominant_left);
  const Matrix b = t.s.inverse() * a * t.s;
  const auto vb = spectral::classify_system(b);
  EXPECT_EQ(vb.kind, spectral::SystemClass::kStronglyEventuallyPositive);
  EXPECT_LT((vb.dominant_right - Vector::Ones(3)).cwiseAbs().maxCoeff(), 1e-8);
  const Vector wb = vb.dominant_left / vb.dominant_left.sum();
  EXPECT_LT((wb - Vector::Constant(3, 1.0 / 3.0)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Transform, SingularFormulaFallsBack) {
  const Vector v = (Vector(2) << 1.0, 1.0).finished();
  const Vector w = (Vector(2) << 0.5, 0.5).finished();
  const auto t = cones::positivizing_transform(v, w);
  EXPECT_LE((t.s * Vector::Ones(2) - v).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((w.transpose() * t.s - Vector::Constant(2, 0.5).transpose())
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
  EXPECT_LT(t.condition_number, 1e12);
}

TEST(Transform, DegenerateW) {
  try {
    cones::positivizing_transform(Vector::Ones(2), Vector::Zero(2));
    FAIL();
  } catch (const evpos::Error& e) {
    EXPECT_EQ(e.code(), evpos::ErrorCode::kDegenerateW);
  }
  try {
    cones::positivizing_transform((Vector(2) << 1.0, 1.0).finished(),
                                  (Vector(2) << 1.0, -1.0).finished());
    FAIL();
  } catch (const evpos::Error& e) {
    EXPECT_EQ(e.code(), evpos::ErrorCode::kDegenerateW);
  }
}

}  // namespace
