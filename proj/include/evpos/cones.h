#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "evpos/spectral.h"
#include "evpos/types.h"

namespace evpos::cones {

/// Ice-cream cone built from the left eigenvectors of A:
///
///   K_alpha = { y : sqrt( sum_{i>=2} alpha_i |<w^i, y>|^2 ) <= (w^1)^T y }.
///
/// A real eigenvalue contributes one real row w^i. A conjugate pair
/// (i, i+1) contributes the rows Re and Im of its projection with weight
/// alpha_i + alpha_{i+1}, which reproduces the modulus terms of both members.
/// The cone is the preimage of the standard Lorentz cone under `transform`.
struct ConeSpec {
  Vector dominant_left;
  Vector dominant_right;
  double dominant_value = 0.0;
  /// One alpha per eigenvalue index i >= 2 (length n - 1).
  Vector alpha;
  /// Unscaled minor rows, (n-1) x n.
  Matrix minor_rows;
  /// Weight applied to each minor row (squared scaling).
  Vector row_weight;
  /// [w^1; diag(sqrt(row_weight)) * minor_rows].
  Matrix transform;
  double condition_number = 1.0;

  int dim() const { return static_cast<int>(dominant_left.size()); }
};

/// Throws kPreconditionFailed unless the verdict has a simple real dominant
/// eigenvalue, kDimensionMismatch on a wrong alpha length, and
/// kPreconditionFailed for non-positive alpha.
ConeSpec make_cone(const spectral::SpectralVerdict& verdict, const Vector& alpha);

/// alpha = s * 1.
ConeSpec make_uniform_cone(const spectral::SpectralVerdict& verdict, double s);

struct Membership {
  bool contained = false;
  double margin = 0.0;
};

/// Margin (w^1)^T y - ||minor part||; contained iff margin >= -tol.
Membership cone_contains(const ConeSpec& cone, const Vector& y, double tol = 1e-10);

/// ((w^1)^T y)^2 - sum alpha_i |<w^i, y>|^2.
double quadratic_margin(const ConeSpec& cone, const Vector& y);

/// Random point with (w^1)^T y = 1. `radius` in [0, 1] is the Lorentz radius
/// in cone coordinates; 1 lands on the boundary. Negative radius draws it
/// uniformly from the ball.
Vector sample_cone_point(const ConeSpec& cone, std::mt19937_64& rng,
                         double radius = -1.0);

struct FlowInvarianceReport {
  int points = 0;
  int times = 0;
  /// Samples with e^{At}x outside the cone.
  int membership_violations = 0;
  /// Samples breaking q(e^{At}x) >= e^{2 lambda_1 t} q(x) - 1e-8.
  int inequality_violations = 0;
  double worst_membership_margin = 0.0;
  double worst_inequality_slack = 0.0;
  /// Smallest membership margin seen along each point's trajectory.
  std::vector<double> min_margin_per_point;

  bool passed() const {
    return membership_violations == 0 && inequality_violations == 0;
  }
};

/// Flows each point forward and checks cone membership and the quadratic
/// margin inequality at the given times.
FlowInvarianceReport flow_invariance_check(const Eigen::Ref<const Matrix>& a,
                                           const ConeSpec& cone,
                                           const std::vector<Vector>& points,
                                           const std::vector<double>& times,
                                           double tol = 1e-8);

/// Samples `samples` interior points and `n_times` equally spaced times in
/// (0, horizon].
FlowInvarianceReport flow_invariance_check(const Eigen::Ref<const Matrix>& a,
                                           const ConeSpec& cone, int samples,
                                           double horizon, std::uint64_t seed,
                                           int n_times = 20);

struct ConeFit {
  bool found = false;
  /// Uniform weight s of the fitted cone K_{s 1}.
  double s = 0.0;
  int steps = 0;
  /// Per-coordinate margins of the acceptance test at s.
  Vector margins;
};

/// Dual-cone test for K_{s1} subset int(orthant): every u = T^{-T} e_j has
/// u_1 >= ||u_{2:}|| + tol.
Vector inner_margins(const ConeSpec& cone);
/// Interior test for orthant subset int(K_{s1}): margin of each e_j.
Vector outer_margins(const ConeSpec& cone);

/// Bisection on s for K_{s1} strictly inside the orthant.
ConeFit fit_inner_cone(const spectral::SpectralVerdict& verdict, double tol = 1e-7);
/// Bisection on s for the orthant strictly inside K_{s1}.
ConeFit fit_outer_cone(const spectral::SpectralVerdict& verdict, double tol = 1e-7);

struct AttractorTrace {
  /// +1 when (w^1)^T x > 0 (trajectory approaches v^1), -1 otherwise.
  int direction = 1;
  std::vector<double> times;
  /// atan(||minor part|| / |(w^1)^T y|) in cone coordinates.
  std::vector<double> cone_angles;
  /// Euclidean angle between y and direction * v^1.
  std::vector<double> angles;
  bool monotone = true;
  double final_angle = 0.0;
};

struct AttractorReport {
  std::vector<AttractorTrace> traces;
  bool all_monotone = true;
  double worst_final_angle = 0.0;
};

AttractorReport attractor_limit_check(const Eigen::Ref<const Matrix>& a,
                                      const ConeSpec& cone,
                                      const std::vector<Vector>& points,
                                      double t_end, int grid = 200);

struct PositivizingTransform {
  Matrix s;
  /// True when the explicit closed-form construction was used; false when it
  /// was singular and the projector construction replaced it.
  bool explicit_formula = true;
  double condition_number = 1.0;
};

/// Invertible S with S 1 = v and w^T S = 1^T / n, after rescaling w so that
/// w^T v = 1. Throws kDegenerateW when w vanishes or w^T v = 0, and
/// kSingularTransform if no invertible S could be produced.
PositivizingTransform positivizing_transform(const Vector& v, const Vector& w);

}  // namespace evpos::cones
