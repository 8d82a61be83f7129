#include "evpos/lyapunov.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "evpos/cones.h"
#include "evpos/linalg.h"

namespace evpos::lyapunov {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_strong(const spectral::SpectralVerdict& verdict) {
  const bool kind_ok =
      verdict.kind == spectral::SystemClass::kStronglyEventuallyPositive ||
      verdict.kind == spectral::SystemClass::kPositive;
  if (!kind_ok || !verdict.has_eigensystem || !verdict.simple_real_dominant ||
      !(verdict.dominant_right.minCoeff() > 0.0) ||
      !(verdict.dominant_left.minCoeff() > 0.0)) {
    throw Error(ErrorCode::kPreconditionFailed,
                "needs a simple real dominant eigenvalue with positive eigenvectors");
  }
}

int active_index(const Vector& x, const Vector& weights) {
  int best = 0;
  double value = x(0) / weights(0);
  for (int i = 1; i < x.size(); ++i) {
    const double r = x(i) / weights(i);
    if (r > value) {
      value = r;
      best = i;
    }
  }
  return best;
}

// Dini derivative of max_i x_i / v_i along A x, per unit length of x.
double max_separable_rate(const Matrix& a, const Vector& v, const Vector& x) {
  const int i = active_index(x, v);
  return a.row(i).dot(x) / v(i) / x.norm();
}

double lambda_max_diagonal(const Matrix& a, const Vector& p) {
  const Matrix sym = a.transpose() * p.asDiagonal();
  const Matrix m = sym + sym.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Vector witness_or_throw(const Matrix& m, const char* what) {
  linalg::StrictFeasibilityProblem problem{m, std::vector<bool>(m.cols(), true)};
  const linalg::StrictWitness w = linalg::find_strict_witness(problem);
  if (w.status == linalg::WitnessStatus::kInfeasible) {
    throw Error(ErrorCode::kNotStable, std::string("no positive ") + what +
                                           " with strictly negative image");
  }
  return w.x / w.x.maxCoeff();
}

}  // namespace

std::string_view to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::kSumSeparable: return "SumSeparable";
    case CertificateKind::kMaxSeparable: return "MaxSeparable";
    case CertificateKind::kDiagonalQuadratic: return "DiagonalQuadratic";
    case CertificateKind::kCertifiedInfeasible: return "CertifiedInfeasible";
    case CertificateKind::kUnknown: return "Unknown";
  }
  return "?";
}

std::string_view to_string(DomainKind d) {
  return d == DomainKind::kOrthantCone ? "OrthantCone" : "WholeSpace";
}

double evaluate(const LyapunovCertificate& cert, const Vector& x) {
  switch (cert.kind) {
    case CertificateKind::kSumSeparable:
      return cert.weights.dot(x);
    case CertificateKind::kMaxSeparable: {
      const int i = active_index(x, cert.weights);
      return x(i) / cert.weights(i);
    }
    case CertificateKind::kDiagonalQuadratic:
      return x.cwiseAbs2().dot(cert.weights);
    default:
      throw Error(ErrorCode::kNotApplicable, "certificate carries no function");
  }
}

PositiveSystemCertificates positive_system_certificates(const Eigen::Ref<const Matrix>& a) {
  require_square(a, "A");
  require_finite(a, "A");
  if (!spectral::is_metzler(a)) {
    throw Error(ErrorCode::kNotMetzler, "A has a negative off-diagonal entry");
  }
  PositiveSystemCertificates out;
  out.xi = witness_or_throw(a.transpose(), "xi");
  out.eta = witness_or_throw(a, "eta");
  out.vd_weights = out.xi.cwiseQuotient(out.eta);
  out.xi_margin = -(a.transpose() * out.xi).maxCoeff();
  out.eta_margin = -(a * out.eta).maxCoeff();
  return out;
}

SumSeparableResult sum_separable_for_evpos(const Eigen::Ref<const Matrix>& a,
                                           const spectral::SpectralVerdict& verdict) {
  require_strong(verdict);
  const double lambda1 = verdict.dominant_value.real();
  if (lambda1 >= 0.0) {
    std::ostringstream msg;
    msg << "dominant eigenvalue " << lambda1 << " is not negative";
    throw Error(ErrorCode::kNotStable, msg.str());
  }
  const cones::ConeFit inner = cones::fit_inner_cone(verdict);
  const cones::ConeFit outer = cones::fit_outer_cone(verdict);

  SumSeparableResult out;
  out.eigen.kind = CertificateKind::kSumSeparable;
  out.eigen.weights = verdict.dominant_left;
  out.eigen.margin = -(a.transpose() * out.eigen.weights).maxCoeff();
  out.eigen.domain = DomainKind::kOrthantCone;
  out.eigen.alpha = outer.found ? outer.s : (inner.found ? inner.s : 1.0);
  out.eigen.reason = "xi = w1, xi^T A = lambda_1 xi^T";

  out.lp.kind = CertificateKind::kSumSeparable;
  out.lp.weights = witness_or_throw(a.transpose(), "xi");
  out.lp.margin = -(a.transpose() * out.lp.weights).maxCoeff();
  out.lp.domain = DomainKind::kOrthantCone;
  if (inner.found) {
    out.lp.alpha = inner.s;
    out.lp.reason = "max-margin LP xi on a cone inside the orthant";
  } else {
    out.lp.kind = CertificateKind::kUnknown;
    out.lp.reason = "no cone inside the orthant was fitted";
  }
  return out;
}

double max_separable_worst_derivative(const Eigen::Ref<const Matrix>& a,
                                      const spectral::SpectralVerdict& verdict,
                                      double s, const MaxSeparableBudget& budget) {
  const cones::ConeSpec cone = cones::make_uniform_cone(verdict, s);
  const Matrix am = a;
  const Vector& v = verdict.dominant_right;
  const int n = cone.dim();
  const Eigen::PartialPivLU<Matrix> lu(cone.transform);
  std::mt19937_64 rng(budget.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto point = [&](const Vector& u) {
    Vector z(n);
    z(0) = 1.0;
    z.tail(n - 1) = u;
    return Vector(lu.solve(z));
  };
  auto random_u = [&](bool boundary) {
    Vector u(n - 1);
    for (int i = 0; i < n - 1; ++i) u(i) = gauss(rng);
    const double norm = u.norm();
    if (norm == 0.0) return u;
    const double r = boundary ? 1.0 : std::pow(unit(rng), 1.0 / (n - 1));
    return Vector(u * (r / norm));
  };

  if (n == 1) return max_separable_rate(am, v, point(Vector()));

  std::vector<std::pair<double, Vector>> samples;
  samples.reserve(budget.samples);
  for (int k = 0; k < budget.samples; ++k) {
    Vector u = random_u(k % 2 == 0);
    samples.emplace_back(max_separable_rate(am, v, point(u)), std::move(u));
  }
  const int keep = std::min<int>(budget.polish_starts, samples.size());
  std::partial_sort(samples.begin(), samples.begin() + keep, samples.end(),
                    [](const auto& l, const auto& r) { return l.first > r.first; });

  double worst = samples.empty() ? -kInf : samples.front().first;
  for (int k = 0; k < keep; ++k) {
    Vector u = samples[k].second;
    double value = samples[k].first;
    double sigma = 0.1;
    int stale = 0;
    for (int it = 0; it < budget.polish_iterations; ++it) {
      Vector trial = u + sigma * random_u(true);
      if (trial.norm() > 1.0) trial.normalize();
      const double tv = max_separable_rate(am, v, point(trial));
      if (tv > value) {
        value = tv;
        u = trial;
        stale = 0;
      } else if (++stale >= 20) {
        sigma /= 2.0;
        stale = 0;
      }
    }
    worst = std::max(worst, value);
  }
  return worst;
}

LyapunovCertificate max_separable_for_evpos(const Eigen::Ref<const Matrix>& a,
                                            const spectral::SpectralVerdict& verdict,
                                            const MaxSeparableBudget& budget) {
  require_strong(verdict);
  const double lambda1 = verdict.dominant_value.real();
  if (lambda1 >= 0.0) {
    throw Error(ErrorCode::kNotStable, "dominant eigenvalue is not negative");
  }
  LyapunovCertificate cert;
  cert.confidence = "sampled";
  cert.weights = verdict.dominant_right;
  cert.domain = DomainKind::kOrthantCone;
  const cones::ConeFit inner = cones::fit_inner_cone(verdict);
  if (!inner.found) {
    cert.reason = "no cone inside the orthant was fitted";
    return cert;
  }
  double s = inner.s;
  for (int k = 0; k <= budget.max_doublings; ++k, s *= 2.0) {
    const double worst = max_separable_worst_derivative(a, verdict, s, budget);
    if (worst < 0.0) {
      cert.kind = CertificateKind::kMaxSeparable;
      cert.alpha = s;
      cert.margin = -worst;
      cert.reason = "sampled decrease of max_i x_i / v1_i on K_alpha";
      return cert;
    }
  }
  cert.reason = "budget exhausted before a decreasing cone was found";
  return cert;
}

LyapunovCertificate diagonal_quadratic_check(const Eigen::Ref<const Matrix>& a,
                                             const DiagonalBudget& budget) {
  require_square(a, "A");
  require_finite(a, "A");
  const int n = static_cast<int>(a.rows());
  LyapunovCertificate cert;
  cert.domain = DomainKind::kWholeSpace;
  for (int i = 0; i < n; ++i) {
    if (a(i, i) >= 0.0) {
      std::ostringstream msg;
      msg << "A[" << i + 1 << "," << i + 1 << "] = " << a(i, i)
          << " >= 0, so e_i^T (A^T P + P A) e_i = 2 p_i A_ii >= 0 for every "
             "positive diagonal P";
      cert.kind = CertificateKind::kCertifiedInfeasible;
      cert.reason = msg.str();
      return cert;
    }
  }

  const Matrix am = a;
  auto score = [&](const Vector& logp) {
    const Vector p = (logp.array() - logp.maxCoeff()).exp();
    return lambda_max_diagonal(am, p);
  };
  std::vector<Vector> seeds{Vector::Zero(n)};
  if (spectral::is_metzler(a)) {
    try {
      seeds.push_back(positive_system_certificates(a).vd_weights.array().log());
    } catch (const Error&) {
    }
  }
  Vector best = seeds.front();
  double best_score = score(best);
  for (const Vector& seed : seeds) {
    const double sc = score(seed);
    if (sc < best_score) {
      best_score = sc;
      best = seed;
    }
  }
  double step = 1.0;
  for (int it = 0; it < budget.iterations && step > 1e-8; ++it) {
    bool improved = false;
    for (int i = 0; i < n; ++i) {
      for (double dir : {1.0, -1.0}) {
        Vector trial = best;
        trial(i) += dir * step;
        const double sc = score(trial);
        if (sc < best_score) {
          best_score = sc;
          best = trial;
          improved = true;
        }
      }
    }
    if (!improved) step /= 2.0;
  }
  const Vector p = (best.array() - best.maxCoeff()).exp();
  cert.weights = p;
  if (best_score < 0.0) {
    cert.kind = CertificateKind::kDiagonalQuadratic;
    cert.margin = -best_score;
    cert.reason = "lambda_max(A^T P + P A) < 0";
  } else {
    cert.kind = CertificateKind::kUnknown;
    cert.margin = -best_score;
    cert.reason = "coordinate descent did not reach a negative lambda_max";
  }
  return cert;
}

MaxSeparableNecessity global_max_separable_necessity(const Eigen::Ref<const Matrix>& a) {
  require_square(a, "A");
  MaxSeparableNecessity out;
  for (int i = 0; i < a.rows(); ++i) {
    const bool negative = a(i, i) < 0.0;
    out.diagonal_negative.push_back(negative);
    if (!negative) out.violations.push_back(i);
  }
  out.impossible = !out.violations.empty();
  return out;
}

DecreaseReport check_decrease(const Eigen::Ref<const Matrix>& a,
                              const spectral::SpectralVerdict& verdict,
                              const LyapunovCertificate& cert, int starts,
                              double horizon, std::uint64_t seed, int n_times,
                              double tol) {
  const int n = static_cast<int>(a.rows());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<Vector> points;
  if (cert.domain == DomainKind::kOrthantCone) {
    const cones::ConeSpec cone = cones::make_uniform_cone(verdict, cert.alpha);
    for (int k = 0; k < starts; ++k) {
      points.push_back(cones::sample_cone_point(cone, rng, k % 2 == 0 ? 1.0 : -1.0));
    }
  } else {
    for (int k = 0; k < starts; ++k) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x(i) = gauss(rng);
      points.push_back(x);
    }
  }
  std::vector<Matrix> flows;
  for (int k = 1; k <= n_times; ++k) flows.push_back(linalg::expm(a, horizon * k / n_times));

  DecreaseReport report;
  report.starts = starts;
  report.worst_increase = -kInf;
  report.min_value = kInf;
  const double power = cert.kind == CertificateKind::kDiagonalQuadratic ? 2.0 : 1.0;
  for (const Vector& x0 : points) {
    double prev = evaluate(cert, x0);
    report.min_value = std::min(report.min_value, prev / std::pow(x0.norm(), power));
    bool violated = false;
    for (const Matrix& flow : flows) {
      const double value = evaluate(cert, flow * x0);
      const double increase = value - prev;
      report.worst_increase = std::max(report.worst_increase, increase);
      if (increase > tol) violated = true;
      prev = value;
    }
    if (violated) ++report.violations;
  }
  return report;
}

}  // namespace evpos::lyapunov
