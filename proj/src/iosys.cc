#include "evpos/iosys.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "evpos/linalg.h"

namespace evpos::iosys {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxGridPoints = 20000;

bool all_nonnegative(const Matrix& m) { return m.size() == 0 || m.minCoeff() >= 0.0; }

double min_or_zero(const Matrix& m) { return m.size() == 0 ? 0.0 : m.minCoeff(); }

double default_horizon(const spectral::SpectralVerdict& verdict) {
  const double gap = verdict.spectral_gap;
  return std::isfinite(gap) && gap > 0.0 ? std::min(1e3, 50.0 / gap) : 10.0;
}

bool strongly_positive_pair(const spectral::SpectralVerdict& verdict) {
  return verdict.has_eigensystem && verdict.simple_real_dominant &&
         verdict.dominant_right.minCoeff() > 0.0 && verdict.dominant_left.minCoeff() > 0.0;
}

void require_hurwitz(const Matrix& a) {
  if (!linalg::is_hurwitz(a)) {
    throw Error(ErrorCode::kNotHurwitz, "A has an eigenvalue with nonnegative real part");
  }
}

// Modal expansion of L e^{At} R around the dominant term
// e^{lambda_1 t} (L v1)(w1^T R). Returns the time after which every entry has
// the sign of the dominant term, or infinity if some entry has a vanishing
// dominant term but a live remainder.
struct ModalTail {
  Matrix dominant;
  double time = kInf;
  bool dominant_negative = false;
  std::string note;
};

ModalTail modal_tail(const spectral::SpectralVerdict& verdict, const Matrix& left,
                     const Matrix& right) {
  const linalg::EigenSystem& eig = verdict.eig;
  const int n = eig.size();
  const double lambda1 = verdict.dominant_value.real();
  ModalTail out;
  out.dominant = (left * verdict.dominant_right) * (verdict.dominant_left.transpose() * right);
  std::vector<Matrix> coeffs;
  std::vector<double> rates;
  for (int i = 1; i < n; ++i) {
    const ComplexVector lv = left.cast<Complex>() * eig.right.col(i);
    const ComplexVector wr = right.cast<Complex>().transpose() * eig.left.col(i).conjugate();
    coeffs.push_back((lv * wr.transpose()).cwiseAbs());
    rates.push_back(eig.values(i).real() - lambda1);
  }
  const double scale = out.dominant.cwiseAbs().maxCoeff();
  double coeff_scale = 0.0;
  for (const Matrix& c : coeffs) coeff_scale = std::max(coeff_scale, c.maxCoeff());
  const double zero = 1e-12 * std::max(scale, coeff_scale);

  Matrix magnitude = out.dominant.cwiseAbs();
  std::vector<std::pair<int, int>> live;
  for (int r = 0; r < out.dominant.rows(); ++r) {
    for (int c = 0; c < out.dominant.cols(); ++c) {
      if (magnitude(r, c) > zero) {
        live.emplace_back(r, c);
        if (out.dominant(r, c) < 0.0) out.dominant_negative = true;
        continue;
      }
      for (const Matrix& coeff : coeffs) {
        if (coeff(r, c) > zero) {
          std::ostringstream msg;
          msg << "dominant term vanishes at entry (" << r + 1 << "," << c + 1
              << ") while a subdominant mode does not";
          out.note = msg.str();
          return out;
        }
      }
    }
  }
  if (out.dominant_negative) out.note = "dominant term has a negative entry";

  auto excess = [&](double t) {
    double worst = -kInf;
    for (const auto& [r, c] : live) {
      double rem = 0.0;
      for (size_t i = 0; i < coeffs.size(); ++i) rem += std::exp(rates[i] * t) * coeffs[i](r, c);
      worst = std::max(worst, rem - magnitude(r, c));
    }
    return worst;
  };
  if (live.empty() || excess(0.0) < 0.0) {
    out.time = 0.0;
    return out;
  }
  double hi = 1.0;
  while (excess(hi) >= 0.0) {
    hi *= 2.0;
    if (hi > 1e8) {
      out.note = "modal remainder does not decay";
      return out;
    }
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? hi : lo) = mid;
  }
  out.time = hi;
  return out;
}

}  // namespace

void LtiSystem::validate() const {
  require_square(a, "A");
  const Eigen::Index nn = a.rows();
  if (b.rows() != nn || c.cols() != nn || d.rows() != c.rows() || d.cols() != b.cols()) {
    std::ostringstream msg;
    msg << "inconsistent shapes: A " << a.rows() << "x" << a.cols() << ", B " << b.rows()
        << "x" << b.cols() << ", C " << c.rows() << "x" << c.cols() << ", D " << d.rows()
        << "x" << d.cols();
    throw Error(ErrorCode::kDimensionMismatch, msg.str());
  }
  require_finite(a, "A");
  require_finite(b, "B");
  require_finite(c, "C");
  require_finite(d, "D");
}

LtiSystem LtiSystem::autonomous(const Matrix& a) {
  LtiSystem sys;
  sys.a = a;
  sys.b = Matrix::Zero(a.rows(), 0);
  sys.c = Matrix::Zero(0, a.rows());
  sys.d = Matrix::Zero(0, 0);
  return sys;
}

std::string_view to_string(InternalStatus s) {
  switch (s) {
    case InternalStatus::kYes: return "Yes";
    case InternalStatus::kNo: return "No";
    case InternalStatus::kInconclusive: return "Inconclusive";
  }
  return "?";
}

std::string_view to_string(NormKind p) {
  switch (p) {
    case NormKind::kOne: return "1";
    case NormKind::kTwo: return "2";
    case NormKind::kInf: return "inf";
  }
  return "?";
}

NormKind parse_norm(std::string_view text) {
  if (text == "1") return NormKind::kOne;
  if (text == "2") return NormKind::kTwo;
  if (text == "inf" || text == "Inf" || text == "INF") return NormKind::kInf;
  throw Error(ErrorCode::kSchemaError, "norm must be 1, 2, or inf");
}

ConditionEvidence flow_sign_evidence(const Eigen::Ref<const Matrix>& a,
                                     const spectral::SpectralVerdict& verdict,
                                     const Matrix& left, const Matrix& right,
                                     const IoCheckOptions& options) {
  ConditionEvidence ev;
  if (left.rows() == 0 || right.cols() == 0) {
    ev.tail_certified = true;
    ev.note = "empty product";
    return ev;
  }
  if (verdict.kind == spectral::SystemClass::kPositive && all_nonnegative(left) &&
      all_nonnegative(right)) {
    ev.tail_certified = true;
    ev.worst_entry = std::min(min_relative_entry(left * right), 0.0);
    ev.note = "e^{At} >= 0 for Metzler A with nonnegative factors";
    return ev;
  }

  ModalTail tail;
  if (strongly_positive_pair(verdict)) {
    tail = modal_tail(verdict, left, right);
    ev.note = tail.note;
  } else {
    ev.note = "no simple dominant mode with positive eigenvectors";
  }
  ev.tail_time = tail.time;
  ev.tail_certified = std::isfinite(tail.time) && !tail.dominant_negative;
  ev.grid_end = std::isfinite(tail.time)
                    ? tail.time
                    : (options.horizon > 0.0 ? options.horizon : default_horizon(verdict));

  double h = options.grid_step > 0.0 ? options.grid_step : 0.01;
  if (ev.grid_end / h > kMaxGridPoints) h = ev.grid_end / kMaxGridPoints;
  const int steps = static_cast<int>(std::ceil(ev.grid_end / h - 1e-9));
  ev.worst_entry = kInf;
  for (int k = 0; k <= steps; ++k) {
    const double t = std::min(k * h, ev.grid_end);
    const Matrix prod = left * linalg::expm(a, t) * right;
    const double scale = prod.cwiseAbs().maxCoeff();
    Eigen::Index r = 0, c = 0;
    const double entry = scale > 0.0 ? prod.minCoeff(&r, &c) / scale : 0.0;
    if (entry < ev.worst_entry) {
      ev.worst_entry = entry;
      ev.worst_time = t;
      ev.worst_row = static_cast<int>(r);
      ev.worst_col = static_cast<int>(c);
    }
    ++ev.grid_points;
  }
  ev.grid_passed = ev.worst_entry >= -options.entry_tol;
  return ev;
}

IoPositivityVerdict check_internal_eventual_positivity(const LtiSystem& sys,
                                                       const IoCheckOptions& options) {
  sys.validate();
  IoPositivityVerdict v;
  spectral::ClassifyOptions copt;
  copt.entry_tol = options.entry_tol;
  v.spectral = spectral::classify_system(sys.a, copt);
  v.d_zero = sys.d.size() == 0 || sys.d.cwiseAbs().maxCoeff() == 0.0;
  v.d_nonnegative = all_nonnegative(sys.d);

  const int n = sys.n();
  v.condition_ii = flow_sign_evidence(sys.a, v.spectral, Matrix::Identity(n, n), sys.b, options);
  v.condition_iii = flow_sign_evidence(sys.a, v.spectral, sys.c, Matrix::Identity(n, n), options);

  auto grid_counterexample = [&](const char* name, const ConditionEvidence& ev,
                                 const Matrix& left, const Matrix& right) {
    const Matrix prod = left * linalg::expm(sys.a, ev.worst_time) * right;
    v.counterexample = Counterexample{name, ev.worst_time, ev.worst_row, ev.worst_col,
                                      prod(ev.worst_row, ev.worst_col)};
  };

  const spectral::SystemClass kind = v.spectral.kind;
  if (!v.d_nonnegative) {
    Eigen::Index r = 0, c = 0;
    const double value = sys.d.minCoeff(&r, &c);
    v.internal = InternalStatus::kNo;
    v.reason = "D has a negative entry";
    v.counterexample =
        Counterexample{"D", 0.0, static_cast<int>(r), static_cast<int>(c), value};
  } else if (!v.condition_ii.grid_passed) {
    v.internal = InternalStatus::kNo;
    v.reason = "e^{At}B has a negative entry";
    grid_counterexample("e^{At}B", v.condition_ii, Matrix::Identity(n, n), sys.b);
  } else if (!v.condition_iii.grid_passed) {
    v.internal = InternalStatus::kNo;
    v.reason = "Ce^{At} has a negative entry";
    grid_counterexample("Ce^{At}", v.condition_iii, sys.c, Matrix::Identity(n, n));
  } else if (kind == spectral::SystemClass::kNotEventuallyPositive) {
    v.internal = InternalStatus::kNo;
    v.reason = "x' = Ax is not eventually positive: " + v.spectral.reason;
  } else if (kind == spectral::SystemClass::kEventuallyPositiveNecessaryOnly) {
    v.internal = InternalStatus::kInconclusive;
    v.reason = "eventual positivity of x' = Ax is not decided by the spectrum";
  } else if (!v.condition_ii.tail_certified || !v.condition_iii.tail_certified) {
    v.internal = InternalStatus::kInconclusive;
    v.reason = "grid passed but the tail could not be certified: " +
               (v.condition_ii.tail_certified ? v.condition_iii.note : v.condition_ii.note);
  } else {
    v.internal = InternalStatus::kYes;
    v.tau0 = v.spectral.exponential_index_upper;
    v.reason = v.d_zero ? "all three conditions hold"
                        : "all three conditions hold and D >= 0";
  }

  if ((kind == spectral::SystemClass::kPositive ||
       kind == spectral::SystemClass::kStronglyEventuallyPositive) &&
      v.d_nonnegative) {
    try {
      v.orthant_image_sufficient =
          check_orthant_image_condition(sys, v.spectral.exponential_index_upper);
    } catch (const Error&) {
      v.orthant_image_sufficient = false;
    }
  }
  return v;
}

bool check_orthant_image_condition(const LtiSystem& sys, double tau0) {
  sys.validate();
  const Matrix e = linalg::expm(sys.a, tau0);
  const Eigen::PartialPivLU<Matrix> lu(e);
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorCode::kSingularExp, "e^{A tau0} is numerically singular");
  }
  auto nonneg = [](const Matrix& x) {
    return x.size() == 0 || x.minCoeff() >= -1e-9 * std::max(1.0, x.cwiseAbs().maxCoeff());
  };
  const Matrix x = lu.solve(sys.b);
  const Matrix y = Eigen::PartialPivLU<Matrix>(e.transpose()).solve(sys.c.transpose());
  return nonneg(x) && nonneg(y) && all_nonnegative(sys.d);
}

SteadyStateMaps steady_state_maps(const LtiSystem& sys) {
  sys.validate();
  require_hurwitz(sys.a);
  const Eigen::PartialPivLU<Matrix> lu(sys.a);
  SteadyStateMaps out;
  out.state_gain = -lu.solve(sys.b);
  out.output_gain = -Matrix(sys.c * lu.inverse());
  out.static_gain = sys.d + sys.c * out.state_gain;
  out.min_state_gain = min_or_zero(out.state_gain);
  out.min_output_gain = min_or_zero(out.output_gain);
  return out;
}

double observability_energy_l1(const LtiSystem& sys, const IoPositivityVerdict& verdict,
                               const Vector& x0) {
  sys.validate();
  if (sys.k() != 1) throw Error(ErrorCode::kNotSiso, "O1 needs a single output");
  if (verdict.internal != InternalStatus::kYes) {
    throw Error(ErrorCode::kNotInternallyEventuallyPositive,
                "O1 closed form needs a sign-constant output");
  }
  if (x0.size() != sys.n()) throw Error(ErrorCode::kDimensionMismatch, "x0 has wrong length");
  if (x0.size() && x0.minCoeff() < 0.0) {
    throw Error(ErrorCode::kPreconditionFailed, "x0 must be nonnegative");
  }
  require_hurwitz(sys.a);
  const Vector z = Eigen::PartialPivLU<Matrix>(sys.a).solve(x0);
  return -(sys.c * z)(0);
}

CinfBound cinf_lower_bound(const LtiSystem& sys, const spectral::SpectralVerdict& verdict,
                           const Vector& x0) {
  sys.validate();
  if (sys.m() != 1) throw Error(ErrorCode::kNotSiso, "C_inf bound needs a single input");
  if (x0.size() != sys.n()) throw Error(ErrorCode::kDimensionMismatch, "x0 has wrong length");
  require_hurwitz(sys.a);
  if (!strongly_positive_pair(verdict)) {
    throw Error(ErrorCode::kPreconditionFailed,
                "needs a simple real dominant eigenvalue with positive eigenvectors");
  }
  const Vector& w = verdict.dominant_left;
  const double wb = w.dot(sys.b.col(0));
  if (!(wb > 0.0)) throw Error(ErrorCode::kInvalidDirection, "w1^T B is not positive");
  CinfBound out;
  out.p = w * (-verdict.dominant_value.real() / wb);
  out.bound = out.p.dot(x0);
  return out;
}

Gramians gramians(const LtiSystem& sys, const IoPositivityVerdict* verdict) {
  sys.validate();
  require_hurwitz(sys.a);
  const Matrix bb = sys.b * sys.b.transpose();
  const Matrix cc = sys.c.transpose() * sys.c;
  Gramians g;
  g.p = linalg::solve_lyapunov(sys.a, bb, linalg::LyapunovSide::kRight);
  g.q = linalg::solve_lyapunov(sys.a, cc, linalg::LyapunovSide::kLeft);
  const double an = sys.a.norm();
  auto relative = [&](const Matrix& res, const Matrix& x, const Matrix& rhs) {
    const double denom = 2.0 * an * x.norm() + rhs.norm();
    return denom > 0.0 ? res.norm() / denom : 0.0;
  };
  g.p_residual = relative(sys.a * g.p + g.p * sys.a.transpose() + bb, g.p, bb);
  g.q_residual = relative(sys.a.transpose() * g.q + g.q * sys.a + cc, g.q, cc);
  g.min_p = min_or_zero(g.p);
  g.min_q = min_or_zero(g.q);
  g.p_nonnegative = g.min_p >= -1e-9;
  g.q_nonnegative = g.min_q >= -1e-9;
  auto support_irreducible = [](const Matrix& m) {
    const double scale = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
    return scale > 0.0 && spectral::is_irreducible(m, 1e-12 * scale);
  };
  g.p_irreducible = support_irreducible(g.p);
  g.q_irreducible = support_irreducible(g.q);
  if (verdict && verdict->internal == InternalStatus::kYes) {
    g.nonnegativity_asserted = true;
    const bool sep =
        verdict->spectral.kind == spectral::SystemClass::kStronglyEventuallyPositive;
    const bool bb_ok = bb.size() && all_nonnegative(bb) && bb.cwiseAbs().maxCoeff() > 0.0;
    const bool cc_ok = cc.size() && all_nonnegative(cc) && cc.cwiseAbs().maxCoeff() > 0.0;
    g.p_irreducibility_asserted = sep && bb_ok;
    g.q_irreducibility_asserted = sep && cc_ok;
  }
  return g;
}

InducedNorm induced_norm(const LtiSystem& sys, NormKind p, const IoCheckOptions& options) {
  sys.validate();
  const SteadyStateMaps maps = steady_state_maps(sys);
  InducedNorm out;
  out.static_gain = maps.static_gain;
  const Matrix& g = maps.static_gain;
  if (g.size() == 0) {
    out.value = 0.0;
  } else if (p == NormKind::kInf) {
    out.value = g.cwiseAbs().rowwise().sum().maxCoeff();
  } else if (p == NormKind::kOne) {
    out.value = g.cwiseAbs().colwise().sum().maxCoeff();
  } else {
    out.value = Eigen::JacobiSVD<Matrix>(g).singularValues()(0);
  }

  if (!all_nonnegative(sys.d)) {
    out.note = "D has a negative entry; value is the static-gain norm only";
    return out;
  }
  try {
    spectral::ClassifyOptions copt;
    copt.entry_tol = options.entry_tol;
    const spectral::SpectralVerdict verdict = spectral::classify_system(sys.a, copt);
    const ConditionEvidence ev = flow_sign_evidence(sys.a, verdict, sys.c, sys.b, options);
    out.certified = ev.passed();
    if (!out.certified) {
      out.note = ev.grid_passed ? "impulse response tail not certified: " + ev.note
                                : "impulse response has a negative sample";
    }
  } catch (const Error& e) {
    out.note = std::string("external positivity not checked: ") + e.what();
  }
  return out;
}

NormCertificate norm_bound_certificate(const LtiSystem& sys, double gamma, NormKind p,
                                       const IoPositivityVerdict& verdict) {
  sys.validate();
  if (p == NormKind::kTwo) {
    throw Error(ErrorCode::kNotApplicable, "LP norm certificates exist for p = 1, inf");
  }
  if (verdict.internal != InternalStatus::kYes) {
    throw Error(ErrorCode::kPremiseFailed, "system is not certified internally eventually positive");
  }
  if (sys.m() == 0 || sys.k() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "norm needs at least one input and output");
  }
  const int n = sys.n();
  // Homogeneous form: find (z, s) >> 0 with [A, B1; C, D1 - gamma 1](z; s) << 0,
  // then zeta = z / s. The p = 1 case uses the transposed blocks.
  Matrix a, b, c, d;
  if (p == NormKind::kInf) {
    a = sys.a, b = sys.b, c = sys.c, d = sys.d;
  } else {
    a = sys.a.transpose(), b = sys.c.transpose(), c = sys.b.transpose(), d = sys.d.transpose();
  }
  const int rows_out = static_cast<int>(c.rows());
  linalg::StrictFeasibilityProblem problem;
  problem.m.resize(n + rows_out, n + 1);
  problem.m.topLeftCorner(n, n) = a;
  problem.m.topRightCorner(n, 1) = b.rowwise().sum();
  problem.m.bottomLeftCorner(rows_out, n) = c;
  problem.m.bottomRightCorner(rows_out, 1) =
      d.rowwise().sum() - Vector::Constant(rows_out, gamma);
  problem.positive.assign(n + 1, true);

  NormCertificate out;
  out.p = p;
  out.gamma = gamma;
  out.static_gain = steady_state_maps(sys).static_gain;
  const linalg::StrictWitness w = linalg::find_strict_witness(problem);
  if (w.status != linalg::WitnessStatus::kFeasible) {
    out.separating = w.separating;
    out.margin = -w.margin;
    return out;
  }
  out.feasible = true;
  out.witness = w.x.head(n) / w.x(n);
  Vector lifted(n + 1);
  lifted << out.witness, 1.0;
  Vector slack = -(problem.m * lifted);
  out.margin = std::min(slack.minCoeff(), out.witness.minCoeff());
  return out;
}

double norm_by_bisection(const LtiSystem& sys, NormKind p, const IoPositivityVerdict& verdict,
                         double tol) {
  auto feasible = [&](double g) { return norm_bound_certificate(sys, g, p, verdict).feasible; };
  double lo = 0.0, hi = 1.0;
  for (int k = 0; !feasible(hi); ++k) {
    if (k > 200) throw Error(ErrorCode::kSingularSystem, "no feasible gamma found");
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; k < 200 && hi - lo > tol * std::max(1.0, hi); ++k) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

ImpulseResponse impulse_response(const LtiSystem& sys, const std::vector<double>& times,
                                 double tol) {
  sys.validate();
  ImpulseResponse out;
  out.times = times;
  out.d = sys.d;
  out.d_nonnegative = all_nonnegative(sys.d);
  out.min_value = kInf;
  for (double t : times) {
    out.values.push_back(sys.c * linalg::expm(sys.a, t) * sys.b);
    if (out.values.back().size()) out.min_value = std::min(out.min_value, out.values.back().minCoeff());
  }
  if (!std::isfinite(out.min_value)) out.min_value = 0.0;
  out.nonnegative_on_grid = out.min_value >= -tol;
  return out;
}

}  // namespace evpos::iosys
