#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "evpos/spectral.h"
#include "evpos/types.h"

namespace evpos::lyapunov {

enum class CertificateKind {
  kSumSeparable,       // V(x) = xi^T x
  kMaxSeparable,       // V(x) = max_i x_i / weights_i
  kDiagonalQuadratic,  // V(x) = sum_i p_i x_i^2
  kCertifiedInfeasible,
  kUnknown,
};

enum class DomainKind { kOrthantCone, kWholeSpace };

std::string_view to_string(CertificateKind k);
std::string_view to_string(DomainKind d);

struct LyapunovCertificate {
  CertificateKind kind = CertificateKind::kUnknown;
  /// xi, the max-separable weights, or the diagonal p.
  Vector weights;
  DomainKind domain = DomainKind::kWholeSpace;
  /// Uniform weight s of the cone K_{s1} when domain is kOrthantCone.
  double alpha = 0.0;
  /// SumSeparable: -max(xi^T A). DiagonalQuadratic: -lambda_max(A^T P + P A).
  /// MaxSeparable: -max sampled derivative on the unit sphere.
  double margin = 0.0;
  /// "exact" or "sampled".
  std::string confidence = "exact";
  std::string reason;
};

/// V(x) for a SumSeparable, MaxSeparable, or DiagonalQuadratic certificate.
/// Max-separable ties resolve to the smallest index.
double evaluate(const LyapunovCertificate& cert, const Vector& x);

struct PositiveSystemCertificates {
  /// xi >> 0 with xi^T A << 0, scaled so max xi = 1.
  Vector xi;
  /// eta >> 0 with A eta << 0, scaled so max eta = 1.
  Vector eta;
  /// xi_i / eta_i.
  Vector vd_weights;
  double xi_margin = 0.0;
  double eta_margin = 0.0;
};

/// Throws kNotMetzler, or kNotStable when no strict witness exists.
PositiveSystemCertificates positive_system_certificates(const Eigen::Ref<const Matrix>& a);

struct SumSeparableResult {
  /// xi = w^1; valid on every K_alpha. `alpha` holds the fitted outer cone.
  LyapunovCertificate eigen;
  /// Max-margin LP xi on the fitted inner cone.
  LyapunovCertificate lp;
};

/// Needs a simple real dominant eigenvalue with positive eigenvectors.
/// Throws kPreconditionFailed otherwise, kNotStable when lambda_1 >= 0.
SumSeparableResult sum_separable_for_evpos(const Eigen::Ref<const Matrix>& a,
                                           const spectral::SpectralVerdict& verdict);

struct MaxSeparableBudget {
  int samples = 10000;
  int max_doublings = 40;
  int polish_starts = 20;
  int polish_iterations = 200;
  std::uint64_t seed = 0;
};

/// Searches K_{s1}, s doubling from the fitted inner cone, for a cone on which
/// max_i x_i / v^1_i decreases at every sampled point. Returns kUnknown when
/// the budget runs out.
LyapunovCertificate max_separable_for_evpos(const Eigen::Ref<const Matrix>& a,
                                            const spectral::SpectralVerdict& verdict,
                                            const MaxSeparableBudget& budget = {});

/// Largest sampled value of (A x)_i / v_i over unit x in K_{s1}, i the active
/// index of max_j x_j / v_j.
double max_separable_worst_derivative(const Eigen::Ref<const Matrix>& a,
                                      const spectral::SpectralVerdict& verdict,
                                      double s, const MaxSeparableBudget& budget);

struct DiagonalBudget {
  int iterations = 200;
};

/// CertifiedInfeasible when some A_ii >= 0; otherwise a coordinate-descent
/// search over log p for lambda_max(A^T P + P A) < 0.
LyapunovCertificate diagonal_quadratic_check(const Eigen::Ref<const Matrix>& a,
                                             const DiagonalBudget& budget = {});

struct MaxSeparableNecessity {
  std::vector<bool> diagonal_negative;
  /// Indices i with A_ii >= 0.
  std::vector<int> violations;
  /// True when some violation rules out every global max-separable V.
  bool impossible = false;
};

MaxSeparableNecessity global_max_separable_necessity(const Eigen::Ref<const Matrix>& a);

struct DecreaseReport {
  int starts = 0;
  int violations = 0;
  /// Largest V(e^{At} x0) - V(e^{As} x0) over consecutive grid times s < t.
  double worst_increase = 0.0;
  /// Smallest V(x0) / ||x0|| over the starts.
  double min_value = 0.0;
  bool passed() const { return violations == 0 && min_value > 0.0; }
};

/// Flows `starts` random points of the certificate domain over an even grid
/// on (0, horizon] and checks V never increases by more than tol.
DecreaseReport check_decrease(const Eigen::Ref<const Matrix>& a,
                              const spectral::SpectralVerdict& verdict,
                              const LyapunovCertificate& cert, int starts,
                              double horizon, std::uint64_t seed, int n_times = 50,
                              double tol = 1e-9);

}  // namespace evpos::lyapunov
