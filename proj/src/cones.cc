#include "evpos/cones.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "evpos/linalg.h"

namespace evpos::cones {

namespace {

constexpr int kMaxSteps = 60;

double cond2(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0) return 1.0;
  const double smin = sv(sv.size() - 1);
  return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

// Splits T y into its apex coordinate and the minor part.
std::pair<double, Vector> cone_coordinates(const ConeSpec& cone, const Vector& y) {
  const Vector z = cone.transform * y;
  return {z(0), z.tail(z.size() - 1)};
}

// Smallest s in a geometric bracket where `accept` flips from false to true,
// searching upward from 1 when `grow` and downward otherwise.
ConeFit bisect_uniform_weight(const std::function<Vector(double)>& margins,
                              double tol, bool grow) {
  ConeFit fit;
  auto accept = [&](double s) { return margins(s).minCoeff() > tol; };
  double good = 0.0, bad = 0.0;
  if (accept(1.0)) {
    good = 1.0;
    // Walk the other way to find where the test starts failing.
    double probe = 1.0;
    for (int k = 0; k < kMaxSteps; ++k) {
      probe = grow ? probe / 2.0 : probe * 2.0;
      ++fit.steps;
      if (!accept(probe)) {
        bad = probe;
        break;
      }
      good = probe;
    }
    if (bad == 0.0) {
      fit.found = true;
      fit.s = good;
      fit.margins = margins(good);
      return fit;
    }
  } else {
    bad = 1.0;
    double probe = 1.0;
    for (int k = 0; k < kMaxSteps; ++k) {
      probe = grow ? probe * 2.0 : probe / 2.0;
      ++fit.steps;
      if (accept(probe)) {
        good = probe;
        break;
      }
      bad = probe;
    }
    if (good == 0.0) return fit;
  }
  for (int k = 0; k < kMaxSteps; ++k) {
    const double mid = std::sqrt(good * bad);
    ++fit.steps;
    (accept(mid) ? good : bad) = mid;
  }
  fit.found = true;
  fit.s = good;
  fit.margins = margins(good);
  return fit;
}

}  // namespace

ConeSpec make_cone(const spectral::SpectralVerdict& verdict, const Vector& alpha) {
  if (!verdict.has_eigensystem || !verdict.simple_real_dominant) {
    throw Error(ErrorCode::kPreconditionFailed,
                "cone needs a simple, real, strictly dominant eigenvalue");
  }
  const linalg::EigenSystem& eig = verdict.eig;
  const int n = eig.size();
  if (alpha.size() != n - 1) {
    throw Error(ErrorCode::kDimensionMismatch, "alpha must have n - 1 entries");
  }
  if (n > 1 && !(alpha.minCoeff() > 0.0)) {
    throw Error(ErrorCode::kPreconditionFailed, "alpha must be positive");
  }

  ConeSpec cone;
  cone.dominant_left = verdict.dominant_left;
  cone.dominant_right = verdict.dominant_right;
  cone.dominant_value = verdict.dominant_value.real();
  cone.alpha = alpha;
  cone.minor_rows.resize(n - 1, n);
  cone.row_weight.resize(n - 1);
  for (int i = 1; i < n;) {
    const Complex value = eig.values(i);
    const ComplexVector w = eig.left.col(i);
    if (value.imag() == 0.0) {
      cone.minor_rows.row(i - 1) = w.real().transpose();
      cone.row_weight(i - 1) = alpha(i - 1);
      i += 1;
    } else {
      // <w, y> = Re(w)^T y - i Im(w)^T y for real y.
      const double weight = alpha(i - 1) + alpha(i);
      cone.minor_rows.row(i - 1) = w.real().transpose();
      cone.minor_rows.row(i) = -w.imag().transpose();
      cone.row_weight(i - 1) = weight;
      cone.row_weight(i) = weight;
      i += 2;
    }
  }
  cone.transform.resize(n, n);
  cone.transform.row(0) = cone.dominant_left.transpose();
  cone.transform.bottomRows(n - 1) =
      cone.row_weight.cwiseSqrt().asDiagonal() * cone.minor_rows;
  cone.condition_number = cond2(cone.transform);
  return cone;
}

ConeSpec make_uniform_cone(const spectral::SpectralVerdict& verdict, double s) {
  const int n = static_cast<int>(verdict.dominant_left.size());
  return make_cone(verdict, Vector::Constant(std::max(n - 1, 0), s));
}

Membership cone_contains(const ConeSpec& cone, const Vector& y, double tol) {
  if (y.size() != cone.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "point and cone differ in dimension");
  }
  const auto [apex, minor] = cone_coordinates(cone, y);
  Membership out;
  out.margin = apex - minor.norm();
  out.contained = out.margin >= -tol;
  return out;
}

double quadratic_margin(const ConeSpec& cone, const Vector& y) {
  const auto [apex, minor] = cone_coordinates(cone, y);
  return apex * apex - minor.squaredNorm();
}

Vector sample_cone_point(const ConeSpec& cone, std::mt19937_64& rng, double radius) {
  const int n = cone.dim();
  Vector z = Vector::Zero(n);
  z(0) = 1.0;
  if (n > 1) {
    std::normal_distribution<double> gauss;
    Vector dir(n - 1);
    for (int i = 0; i < n - 1; ++i) dir(i) = gauss(rng);
    dir.normalize();
    double r = radius;
    if (r < 0.0) {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      r = std::pow(unit(rng), 1.0 / (n - 1));
    }
    z.tail(n - 1) = r * dir;
  }
  return cone.transform.partialPivLu().solve(z);
}

FlowInvarianceReport flow_invariance_check(const Eigen::Ref<const Matrix>& a,
                                           const ConeSpec& cone,
                                           const std::vector<Vector>& points,
                                           const std::vector<double>& times,
                                           double tol) {
  if (a.rows() != cone.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "A and cone differ in dimension");
  }
  FlowInvarianceReport report;
  report.points = static_cast<int>(points.size());
  report.times = static_cast<int>(times.size());
  report.worst_membership_margin = std::numeric_limits<double>::infinity();
  report.worst_inequality_slack = std::numeric_limits<double>::infinity();
  std::vector<Matrix> flows;
  flows.reserve(times.size());
  for (double t : times) flows.push_back(linalg::expm(a, t));

  for (const Vector& x : points) {
    const bool starts_inside = cone_contains(cone, x).contained;
    const double q0 = quadratic_margin(cone, x);
    double point_min = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < times.size(); ++k) {
      const Vector y = flows[k] * x;
      const double margin = cone_contains(cone, y).margin;
      point_min = std::min(point_min, margin);
      if (!starts_inside) continue;
      report.worst_membership_margin = std::min(report.worst_membership_margin, margin);
      if (margin < -tol) ++report.membership_violations;
      const double slack = quadratic_margin(cone, y) -
                           std::exp(2.0 * cone.dominant_value * times[k]) * q0;
      report.worst_inequality_slack = std::min(report.worst_inequality_slack, slack);
      if (slack < -tol) ++report.inequality_violations;
    }
    report.min_margin_per_point.push_back(point_min);
  }
  return report;
}

FlowInvarianceReport flow_invariance_check(const Eigen::Ref<const Matrix>& a,
                                           const ConeSpec& cone, int samples,
                                           double horizon, std::uint64_t seed,
                                           int n_times) {
  std::mt19937_64 rng(seed);
  std::vector<Vector> points;
  for (int i = 0; i < samples; ++i) points.push_back(sample_cone_point(cone, rng));
  std::vector<double> times;
  for (int k = 1; k <= n_times; ++k) times.push_back(horizon * k / n_times);
  return flow_invariance_check(a, cone, points, times);
}

Vector inner_margins(const ConeSpec& cone) {
  const int n = cone.dim();
  const Matrix dual = cone.transform.transpose().partialPivLu().solve(
      Matrix::Identity(n, n));
  Vector margins(n);
  for (int j = 0; j < n; ++j) {
    const Vector u = dual.col(j);
    margins(j) = u(0) - u.tail(n - 1).norm();
  }
  return margins;
}

Vector outer_margins(const ConeSpec& cone) {
  const int n = cone.dim();
  Vector margins(n);
  for (int j = 0; j < n; ++j) {
    margins(j) = cone_contains(cone, Vector::Unit(n, j)).margin;
  }
  return margins;
}

ConeFit fit_inner_cone(const spectral::SpectralVerdict& verdict, double tol) {
  if (!verdict.has_eigensystem || !verdict.simple_real_dominant) {
    throw Error(ErrorCode::kPreconditionFailed,
                "cone fit needs a simple, real, strictly dominant eigenvalue");
  }
  return bisect_uniform_weight(
      [&](double s) { return inner_margins(make_uniform_cone(verdict, s)); }, tol,
      /*grow=*/true);
}

ConeFit fit_outer_cone(const spectral::SpectralVerdict& verdict, double tol) {
  if (!verdict.has_eigensystem || !verdict.simple_real_dominant) {
    throw Error(ErrorCode::kPreconditionFailed,
                "cone fit needs a simple, real, strictly dominant eigenvalue");
  }
  return bisect_uniform_weight(
      [&](double s) { return outer_margins(make_uniform_cone(verdict, s)); }, tol,
      /*grow=*/false);
}

AttractorReport attractor_limit_check(const Eigen::Ref<const Matrix>& a,
                                      const ConeSpec& cone,
                                      const std::vector<Vector>& points,
                                      double t_end, int grid) {
  AttractorReport report;
  const Vector v_hat = cone.dominant_right.normalized();
  std::vector<double> times;
  std::vector<Matrix> flows;
  for (int k = 0; k <= grid; ++k) {
    times.push_back(t_end * k / grid);
    flows.push_back(linalg::expm(a, times.back()));
  }
  for (const Vector& x : points) {
    AttractorTrace trace;
    trace.direction = cone.dominant_left.dot(x) >= 0.0 ? 1 : -1;
    trace.times = times;
    for (size_t k = 0; k < times.size(); ++k) {
      Vector y = flows[k] * x;
      y *= trace.direction;
      const auto [apex, minor] = cone_coordinates(cone, y);
      trace.cone_angles.push_back(std::atan2(minor.norm(), apex));
      const double along = y.dot(v_hat);
      trace.angles.push_back(std::atan2((y - along * v_hat).norm(), along));
      if (k > 0 && trace.cone_angles[k] > trace.cone_angles[k - 1] + 1e-12) {
        trace.monotone = false;
      }
    }
    trace.final_angle = trace.angles.back();
    report.all_monotone = report.all_monotone && trace.monotone;
    report.worst_final_angle = std::max(report.worst_final_angle, trace.final_angle);
    report.traces.push_back(std::move(trace));
  }
  return report;
}

PositivizingTransform positivizing_transform(const Vector& v, const Vector& w) {
  const Eigen::Index n = v.size();
  if (w.size() != n || n == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "v and w differ in length");
  }
  require_finite(v, "v");
  require_finite(w, "w");
  if (w.cwiseAbs().maxCoeff() < 1e-12) {
    throw Error(ErrorCode::kDegenerateW, "all entries of w are below 1e-12");
  }
  const double pairing = w.dot(v);
  if (std::abs(pairing) < 1e-12 * w.norm() * v.norm()) {
    throw Error(ErrorCode::kDegenerateW, "w^T v vanishes");
  }
  const Vector wn = w / pairing;
  const double nd = static_cast<double>(n);
  const Vector ones = Vector::Ones(n);

  // Move the largest |w_k| to the front so the division below is safe.
  Eigen::Index lead = 0;
  wn.cwiseAbs().maxCoeff(&lead);
  Eigen::PermutationMatrix<Eigen::Dynamic> swap(n);
  swap.setIdentity();
  swap.applyTranspositionOnTheRight(0, lead);
  const Vector vp = swap.transpose() * v;
  const Vector wp = swap.transpose() * wn;

  Matrix s = Matrix::Identity(n, n) / nd;
  s.col(0) += vp - ones / nd;
  s.row(0) += (ones - wp).transpose() / (wp(0) * nd);
  s(0, 0) += -1.0 / wp(0) + wp.sum() / (wp(0) * nd);
  s = swap * s * swap.transpose();

  PositivizingTransform out;
  out.s = s;
  out.condition_number = cond2(s);
  if (out.condition_number < 1e12) return out;

  // S = v 1^T / n + (I - v w^T)(I - 1 1^T / n).
  out.explicit_formula = false;
  out.s = v * ones.transpose() / nd + (Matrix::Identity(n, n) - v * wn.transpose()) *
                                          (Matrix::Identity(n, n) - ones * ones.transpose() / nd);
  out.condition_number = cond2(out.s);
  if (!(out.condition_number < 1e12)) {
    throw Error(ErrorCode::kSingularTransform, "no invertible positivizing transform");
  }
  return out;
}

}  // namespace evpos::cones
