#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evpos/spectral.h"
#include "evpos/types.h"

namespace evpos::iosys {

/// x' = A x + B u, y = C x + D u. A system without inputs or outputs keeps
/// B, C, D with zero columns or rows.
struct LtiSystem {
  Matrix a;
  Matrix b;
  Matrix c;
  Matrix d;

  int n() const { return static_cast<int>(a.rows()); }
  int m() const { return static_cast<int>(b.cols()); }
  int k() const { return static_cast<int>(c.rows()); }

  /// Throws kNonSquare, kDimensionMismatch, or kNonFinite.
  void validate() const;

  static LtiSystem autonomous(const Matrix& a);
};

/// Sign evidence for L e^{At} R on a grid of [0, grid_end] together with the
/// modal tail bound that covers t beyond grid_end.
struct ConditionEvidence {
  bool grid_passed = true;
  /// Smallest entry relative to the largest absolute entry over the grid.
  double worst_entry = 0.0;
  double worst_time = 0.0;
  int worst_row = 0;
  int worst_col = 0;
  double grid_end = 0.0;
  int grid_points = 0;
  /// Time after which the dominant mode keeps every entry nonnegative;
  /// infinite when no such time could be certified.
  double tail_time = 0.0;
  bool tail_certified = false;
  std::string note;

  bool passed() const { return grid_passed && tail_certified; }
};

enum class InternalStatus { kYes, kNo, kInconclusive };
std::string_view to_string(InternalStatus s);

struct Counterexample {
  std::string condition;
  double t = 0.0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

struct IoPositivityVerdict {
  InternalStatus internal = InternalStatus::kInconclusive;
  std::string reason;
  /// Exponential index of x' = A x when internal is kYes.
  double tau0 = 0.0;
  std::optional<Counterexample> counterexample;
  spectral::SpectralVerdict spectral;
  ConditionEvidence condition_ii;   // e^{At} B >= 0
  ConditionEvidence condition_iii;  // C e^{At} >= 0
  bool d_zero = true;
  bool d_nonnegative = true;
  /// Columns of B and C^T lie in e^{A tau0} and e^{A^T tau0} images of the
  /// orthant (sufficient test); false when not applicable.
  bool orthant_image_sufficient = false;
};

struct IoCheckOptions {
  /// Grid horizon used when no modal tail time is available; <= 0 picks
  /// min(1e3, 50 / spectral gap).
  double horizon = 0.0;
  double grid_step = 0.01;
  double entry_tol = 1e-9;
};

IoPositivityVerdict check_internal_eventual_positivity(const LtiSystem& sys,
                                                       const IoCheckOptions& options = {});

/// solve(e^{A tau0}, B) >= -1e-9, solve(e^{A^T tau0}, C^T) >= -1e-9, D >= 0.
/// Throws kSingularExp if e^{A tau0} cannot be inverted.
bool check_orthant_image_condition(const LtiSystem& sys, double tau0);

/// Grid and tail evidence for L e^{At} R >= 0.
ConditionEvidence flow_sign_evidence(const Eigen::Ref<const Matrix>& a,
                                     const spectral::SpectralVerdict& verdict,
                                     const Matrix& left, const Matrix& right,
                                     const IoCheckOptions& options);

struct SteadyStateMaps {
  Matrix state_gain;   // -A^{-1} B
  Matrix output_gain;  // -C A^{-1}
  Matrix static_gain;  // D - C A^{-1} B
  double min_state_gain = 0.0;
  double min_output_gain = 0.0;
};

/// Throws kNotHurwitz.
SteadyStateMaps steady_state_maps(const LtiSystem& sys);

/// -C A^{-1} x0 for a single-output internally eventually positive system.
/// Throws kNotSiso, kNotInternallyEventuallyPositive, kNotHurwitz, or
/// kPreconditionFailed for x0 with a negative entry.
double observability_energy_l1(const LtiSystem& sys, const IoPositivityVerdict& verdict,
                               const Vector& x0);

struct CinfBound {
  double bound = 0.0;
  Vector p;
};

/// p = w1 (-lambda_1) / (w1^T B), so that -p^T A^{-1} B = 1 and
/// p^T e^{At} B = -lambda_1 e^{lambda_1 t}. Throws kNotSiso (m != 1),
/// kNotHurwitz, kPreconditionFailed, or kInvalidDirection when w1^T B <= 0.
CinfBound cinf_lower_bound(const LtiSystem& sys, const spectral::SpectralVerdict& verdict,
                           const Vector& x0);

struct Gramians {
  Matrix p;  // A P + P A^T + B B^T = 0
  Matrix q;  // A^T Q + Q A + C^T C = 0
  double p_residual = 0.0;
  double q_residual = 0.0;
  double min_p = 0.0;
  double min_q = 0.0;
  bool p_nonnegative = false;
  bool q_nonnegative = false;
  bool p_irreducible = false;
  bool q_irreducible = false;
  /// Claims that follow from the positivity verdict.
  bool nonnegativity_asserted = false;
  bool p_irreducibility_asserted = false;
  bool q_irreducibility_asserted = false;
};

/// Throws kNotHurwitz. Pass the positivity verdict to obtain the asserted
/// flags.
Gramians gramians(const LtiSystem& sys, const IoPositivityVerdict* verdict = nullptr);

enum class NormKind { kOne, kTwo, kInf };
std::string_view to_string(NormKind p);
/// Accepts "1", "2", "inf".
NormKind parse_norm(std::string_view text);

struct InducedNorm {
  double value = 0.0;
  /// External positivity (grid + tail) and D >= 0 were verified, so the
  /// static-gain value is the induced norm.
  bool certified = false;
  Matrix static_gain;
  std::string note;
};

/// Throws kNotHurwitz.
InducedNorm induced_norm(const LtiSystem& sys, NormKind p,
                         const IoCheckOptions& options = {});

struct NormCertificate {
  bool feasible = false;
  NormKind p = NormKind::kInf;
  double gamma = 0.0;
  /// zeta (p = inf) or xi (p = 1).
  Vector witness;
  /// Smallest slack of the strict inequalities at the witness.
  double margin = 0.0;
  Matrix static_gain;
  /// Gordan vector proving infeasibility.
  Vector separating;
};

/// LP test of [A B; C D][zeta; 1] << [0; gamma 1] (p = inf) or its transpose
/// (p = 1). Throws kPremiseFailed unless verdict.internal is kYes and
/// kNotApplicable for p = 2.
NormCertificate norm_bound_certificate(const LtiSystem& sys, double gamma, NormKind p,
                                       const IoPositivityVerdict& verdict);

/// Bisection on gamma over norm_bound_certificate, returning the infimum of
/// the feasible gammas within tol.
double norm_by_bisection(const LtiSystem& sys, NormKind p,
                         const IoPositivityVerdict& verdict, double tol = 1e-9);

struct ImpulseResponse {
  std::vector<double> times;
  /// C e^{At} B at each time (k x m).
  std::vector<Matrix> values;
  Matrix d;
  double min_value = 0.0;
  bool d_nonnegative = true;
  bool nonnegative_on_grid = true;
};

ImpulseResponse impulse_response(const LtiSystem& sys, const std::vector<double>& times,
                                 double tol = 1e-9);

/// Piecewise-constant input: values[i] is applied on [times[i], times[i+1]),
/// the last one forever. times[0] must be 0.
struct InputSchedule {
  std::vector<double> times;
  std::vector<Vector> values;

  static InputSchedule constant(const Vector& u);
  const Vector& at(double t) const;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<Vector> y;
};

/// Exact discretization for piecewise-constant inputs. Samples at multiples
/// of `step` up to `horizon` (the last one clipped to horizon).
Trajectory simulate(const LtiSystem& sys, const Vector& x0, const InputSchedule& input,
                    double horizon, double step);

}  // namespace evpos::iosys
