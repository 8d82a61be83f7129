#include "evpos/spectral.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace evpos::spectral {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Normalizes the dominant pair: largest-magnitude entry of v becomes +1 and
// w^T v = 1.
void normalize_dominant(const linalg::EigenSystem& eig, Vector& v, Vector& w) {
  v = eig.right.col(0).real();
  w = eig.left.col(0).real();
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  const double scale = v(k);
  v /= scale;
  w *= scale;
}

bool strictly_positive(const Vector& x, double tol) {
  return x.size() > 0 && x.minCoeff() > tol * x.cwiseAbs().maxCoeff();
}

bool nonnegative(const Vector& x, double tol) {
  return x.size() > 0 && x.minCoeff() >= -tol * x.cwiseAbs().maxCoeff();
}

// Sign check of e^{(A - lambda_1 I) t} on [T/2, T]. Entries where the
// dominant projector vanishes are scaled by the largest such entry.
OracleOutcome sample_late_flow(const Eigen::Ref<const Matrix>& a, double lambda1,
                               double gap, double entry_tol, const Matrix& projector,
                               double zero_tol) {
  const Eigen::Index n = a.rows();
  const Matrix shifted = a - lambda1 * Matrix::Identity(n, n);
  const double horizon =
      std::isfinite(gap) && gap > 0.0 ? std::min(1e3, 50.0 / gap) : 1e3;
  const double pmax = projector.cwiseAbs().maxCoeff();
  const auto masked = (projector.cwiseAbs().array() <= zero_tol * pmax).eval();
  constexpr int kSamples = 400;
  for (int i = 0; i <= kSamples; ++i) {
    const double t = horizon * (0.5 + 0.5 * i / kSamples);
    const Matrix e = linalg::expm(shifted, t);
    if (min_relative_entry(e) < -entry_tol) return OracleOutcome::kFails;
    double mask_max = 0.0, mask_min = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        if (!masked(r, c)) continue;
        mask_max = std::max(mask_max, std::abs(e(r, c)));
        mask_min = std::min(mask_min, e(r, c));
      }
    }
    if (mask_max > 1e-250 && mask_min < -entry_tol * mask_max) return OracleOutcome::kFails;
  }
  return OracleOutcome::kHolds;
}

}  // namespace

std::string_view to_string(SystemClass c) {
  switch (c) {
    case SystemClass::kPositive: return "Positive";
    case SystemClass::kStronglyEventuallyPositive:
      return "StronglyEventuallyPositive";
    case SystemClass::kEventuallyPositiveNecessaryOnly:
      return "EventuallyPositiveNecessaryOnly";
    case SystemClass::kNotEventuallyPositive: return "NotEventuallyPositive";
  }
  return "Unknown";
}

std::string_view to_string(OracleOutcome o) {
  switch (o) {
    case OracleOutcome::kNotRun: return "NotRun";
    case OracleOutcome::kHolds: return "Holds";
    case OracleOutcome::kFails: return "Fails";
  }
  return "Unknown";
}

std::string_view to_string(MatrixClassTag t) {
  switch (t) {
    case MatrixClassTag::kEventuallyPositiveMatrix:
      return "EventuallyPositiveMatrix";
    case MatrixClassTag::kEventuallyNonnegativeNonnilpotent:
      return "EventuallyNonnegativeNonnilpotent";
    case MatrixClassTag::kWpfOnly: return "WPFOnly";
    case MatrixClassTag::kNone: return "None";
  }
  return "Unknown";
}

bool is_metzler(const Eigen::Ref<const Matrix>& a, double tol) {
  require_square(a, "A");
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) < -tol) return false;
    }
  }
  return true;
}

bool is_irreducible(const Eigen::Ref<const Matrix>& a, double tol) {
  require_square(a, "A");
  const Eigen::Index n = a.rows();
  if (n <= 1) return true;
  auto reaches_all = [&](bool transpose) {
    std::vector<bool> seen(n, false);
    std::queue<Eigen::Index> frontier;
    frontier.push(0);
    seen[0] = true;
    Eigen::Index count = 1;
    while (!frontier.empty()) {
      const Eigen::Index i = frontier.front();
      frontier.pop();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double entry = transpose ? a(j, i) : a(i, j);
        if (j != i && !seen[j] && std::abs(entry) > tol) {
          seen[j] = true;
          ++count;
          frontier.push(j);
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

double modal_tail_time(const linalg::EigenSystem& eig, const Vector& v1,
                       const Vector& w1) {
  const int n = eig.size();
  const double target = (v1 * w1.transpose()).minCoeff();
  if (!(target > 0.0)) {
    throw Error(ErrorCode::kPreconditionFailed,
                "dominant projector is not strictly positive");
  }
  const double lambda1 = eig.values(0).real();
  std::vector<double> rates, weights;
  for (int i = 1; i < n; ++i) {
    const ComplexMatrix proj = eig.right.col(i) * eig.left.col(i).adjoint();
    const Complex value = eig.values(i);
    if (value.imag() == 0.0) {
      weights.push_back(proj.real().cwiseAbs().maxCoeff());
    } else if (value.imag() > 0.0) {
      weights.push_back(2.0 * (proj.real().cwiseAbs().maxCoeff() +
                               proj.imag().cwiseAbs().maxCoeff()));
    } else {
      continue;  // counted with its partner
    }
    rates.push_back(value.real() - lambda1);
  }
  auto remainder = [&](double t) {
    double s = 0.0;
    for (size_t k = 0; k < rates.size(); ++k) s += weights[k] * std::exp(rates[k] * t);
    return s;
  };
  if (remainder(0.0) < target) return 0.0;
  double hi = 1.0;
  while (remainder(hi) >= target) {
    hi *= 2.0;
    if (hi > 1e12) {
      throw Error(ErrorCode::kPreconditionFailed, "modal remainder does not decay");
    }
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (remainder(mid) < target ? hi : lo) = mid;
  }
  return hi;
}

ExponentialIndex exponential_index(const Eigen::Ref<const Matrix>& a,
                                   const SpectralVerdict& verdict,
                                   double grid_step) {
  ExponentialIndex out;
  if (verdict.kind == SystemClass::kPositive) {
    out.tau = 0.0;
    out.tail_time = kInf;
    return out;
  }
  if (verdict.kind != SystemClass::kStronglyEventuallyPositive) {
    throw Error(ErrorCode::kNotApplicable,
                "exponential index needs a (strongly eventually) positive system");
  }
  const double tail = modal_tail_time(verdict.eig, verdict.dominant_right,
                                      verdict.dominant_left);
  out.tail_time = tail;
  if (tail == 0.0) return out;

  const double h = grid_step > 0.0 ? grid_step : std::min(0.01, tail / 1000.0);
  const double tol = verdict.entry_tol;
  const int steps = static_cast<int>(std::ceil(tail / h - 1e-9));
  int last_negative = -1;
  for (int k = 0; k <= steps; ++k) {
    const double t = std::min(k * h, tail);
    const double entry = min_relative_entry(linalg::expm(a, t));
    out.coarse.times.push_back(t);
    out.coarse.min_entries.push_back(entry);
    if (entry < -tol) last_negative = k;
  }
  if (last_negative < 0) return out;
  if (last_negative == steps) {
    // The modal bound guarantees positivity at the tail time itself.
    throw Error(ErrorCode::kPreconditionFailed,
                "negative entry at the certified tail time");
  }

  // One refinement pass by a factor of 10 inside the last coarse gap.
  const double start = last_negative * h;
  const double end = std::min((last_negative + 1) * h, tail);
  const double fine_h = (end - start) / 10.0;
  double tau = end;
  for (int k = 0; k <= 10; ++k) {
    const double t = start + k * fine_h;
    const double entry = min_relative_entry(linalg::expm(a, t));
    out.fine.times.push_back(t);
    out.fine.min_entries.push_back(entry);
    if (entry < -tol) tau = std::min(end, t + fine_h);
  }
  out.tau = tau;
  return out;
}

SpectralVerdict classify_system(const Eigen::Ref<const Matrix>& a,
                                const ClassifyOptions& options) {
  require_square(a, "A");
  require_finite(a, "A");
  SpectralVerdict out;
  out.entry_tol = options.entry_tol;
  const bool metzler = is_metzler(a);

  try {
    out.eig = linalg::eigensystem(a, options.tol);
    out.has_eigensystem = true;
  } catch (const Error& e) {
    if (!metzler || e.code() != ErrorCode::kNotDiagonalizable) throw;
  }

  if (!out.has_eigensystem) {
    out.kind = SystemClass::kPositive;
    out.reason = "Metzler (defective; eigenvector data omitted)";
    out.dominant_value = linalg::spectral_abscissa(a);
    out.certified_tail_time = kInf;
    return out;
  }

  const linalg::EigenSystem& eig = out.eig;
  const int n = eig.size();
  out.dominant_value = eig.values(0);
  const double lambda1 = eig.values(0).real();
  const double scale = std::max(1.0, std::abs(eig.values(0)));
  const bool dominant_real = eig.is_real(0, options.tol);

  // Real-part cluster at the top of the spectrum.
  int cluster = 1;
  bool cluster_complex = !dominant_real;
  out.spectral_gap = kInf;
  for (int j = 1; j < n; ++j) {
    const double gap = lambda1 - eig.values(j).real();
    if (gap <= options.tol * scale) {
      ++cluster;
      if (!eig.is_real(j, options.tol)) cluster_complex = true;
    } else {
      out.spectral_gap = std::min(out.spectral_gap, gap);
    }
  }

  if (dominant_real) {
    normalize_dominant(eig, out.dominant_right, out.dominant_left);
    out.dominant_value = Complex(lambda1, 0.0);
    out.simple_real_dominant = cluster == 1;
  }

  if (metzler) {
    out.kind = SystemClass::kPositive;
    out.reason = "Metzler";
    out.exponential_index_upper = 0.0;
    out.certified_tail_time = kInf;
    return out;
  }
  if (cluster_complex) {
    out.kind = SystemClass::kNotEventuallyPositive;
    out.reason = "complex eigenvalue attains the dominant real part";
    return out;
  }
  if (cluster > 1) {
    // Repeated real dominant eigenvalue: e^{(A - lambda_1)t} tends to the
    // spectral projector, which must be nonnegative.
    Matrix projector = Matrix::Zero(n, n);
    for (int j = 0; j < cluster; ++j) {
      projector += (eig.right.col(j) * eig.left.col(j).adjoint()).real();
    }
    if (min_relative_entry(projector) < -options.tol) {
      out.kind = SystemClass::kNotEventuallyPositive;
      out.reason = "repeated dominant eigenvalue with sign-indefinite projector";
      return out;
    }
    out.kind = SystemClass::kEventuallyPositiveNecessaryOnly;
    out.reason = "repeated dominant eigenvalue with nonnegative projector";
    out.sampling_oracle = sample_late_flow(a, lambda1, out.spectral_gap, options.entry_tol,
                                           projector, options.tol);
    return out;
  }

  const Vector& v = out.dominant_right;
  const Vector& w = out.dominant_left;
  if (strictly_positive(v, options.tol) && strictly_positive(w, options.tol)) {
    out.kind = SystemClass::kStronglyEventuallyPositive;
    out.reason = "simple real dominant eigenvalue with positive eigenvectors";
    const ExponentialIndex index = exponential_index(a, out, options.grid_step);
    out.exponential_index_upper = index.tau;
    out.certified_tail_time = index.tail_time;
    out.grid = index.coarse;
    return out;
  }
  if (nonnegative(v, options.tol) && nonnegative(w, options.tol)) {
    out.kind = SystemClass::kEventuallyPositiveNecessaryOnly;
    out.reason = "dominant eigenvectors nonnegative with zero entries";
    out.sampling_oracle = sample_late_flow(a, lambda1, out.spectral_gap, options.entry_tol,
                                           Matrix(v * w.transpose()), options.tol);
    return out;
  }
  out.kind = SystemClass::kNotEventuallyPositive;
  out.reason = "dominant eigenvectors are sign-indefinite";
  return out;
}

bool has_weak_perron_frobenius(const Eigen::Ref<const Matrix>& a) {
  require_square(a, "A");
  const Eigen::Index n = a.rows();
  if (n == 0) return false;
  auto has_nonnegative_perron_vector = [n](const Matrix& m) {
    Eigen::EigenSolver<Matrix> solver(m, false);
    const ComplexVector values = solver.eigenvalues();
    const double rho = values.cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, rho);
    bool rho_is_eigenvalue = false;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (std::abs(values(i) - Complex(rho, 0.0)) <= 1e-6 * scale) {
        rho_is_eigenvalue = true;
      }
    }
    if (!rho_is_eigenvalue) return false;

    Eigen::JacobiSVD<Matrix> svd(m - rho * Matrix::Identity(n, n),
                                 Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double cut = 1e-7 * std::max(1.0, m.cwiseAbs().maxCoeff());
    int dim = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) <= cut) ++dim;
    }
    if (dim == 0) dim = 1;
    const Matrix basis = svd.matrixV().rightCols(dim);
    if (dim == 1) {
      const Vector x = basis.col(0);
      const double s = x.cwiseAbs().maxCoeff();
      return x.minCoeff() >= -1e-9 * s || x.maxCoeff() <= 1e-9 * s;
    }
    // Nonnegative combination of the null-space basis: N c >= 0, 1^T N c = 1.
    linalg::LinearProgram lp;
    const Matrix ones_row = Matrix::Ones(1, n) * basis;
    lp.g = Matrix::Zero(n + 2, 2 * dim);
    lp.g.topLeftCorner(n, dim) = -basis;
    lp.g.topRightCorner(n, dim) = basis;
    lp.g.block(n, 0, 1, dim) = ones_row;
    lp.g.block(n, dim, 1, dim) = -ones_row;
    lp.g.block(n + 1, 0, 1, dim) = -ones_row;
    lp.g.block(n + 1, dim, 1, dim) = ones_row;
    lp.h = Vector::Zero(n + 2);
    lp.h(n) = 1.0;
    lp.h(n + 1) = -1.0;
    lp.c = Vector::Zero(2 * dim);
    return linalg::solve_lp(lp).status == linalg::LpStatus::kOptimal;
  };
  return has_nonnegative_perron_vector(a) &&
         has_nonnegative_perron_vector(a.transpose());
}

MatrixClass classify_matrix_powers(const Eigen::Ref<const Matrix>& a, int max_k) {
  require_square(a, "A");
  require_finite(a, "A");
  const Eigen::Index n = a.rows();
  MatrixClass out;
  out.weak_perron_frobenius = has_weak_perron_frobenius(a);

  // Nilpotency: A^n = 0 up to roundoff.
  {
    const double base = std::max(1.0, a.cwiseAbs().maxCoeff());
    Matrix power = Matrix::Identity(n, n);
    for (Eigen::Index k = 0; k < n; ++k) power = (power * a / base).eval();
    out.nilpotent = power.cwiseAbs().maxCoeff() <= 1e-12;
  }

  const int top = 2 * std::max(max_k, 1);
  std::vector<bool> positive(top + 1, false), nonneg(top + 1, false);
  Matrix power = Matrix::Identity(n, n);
  for (int k = 1; k <= top; ++k) {
    power = (power * a).eval();
    const double s = power.cwiseAbs().maxCoeff();
    if (s == 0.0) {
      nonneg[k] = true;
      continue;
    }
    power /= s;
    positive[k] = power.minCoeff() > 1e-12;
    nonneg[k] = power.minCoeff() >= -1e-9;
  }
  auto holds_on_window = [&](const std::vector<bool>& flag, int k0) {
    for (int k = k0; k <= 2 * k0; ++k) {
      if (!flag[k]) return false;
    }
    return true;
  };
  for (int k0 = 1; k0 <= max_k; ++k0) {
    if (holds_on_window(positive, k0)) {
      out.tag = MatrixClassTag::kEventuallyPositiveMatrix;
      out.witness_power = k0;
      return out;
    }
  }
  if (!out.nilpotent) {
    for (int k0 = 1; k0 <= max_k; ++k0) {
      if (holds_on_window(nonneg, k0)) {
        out.tag = MatrixClassTag::kEventuallyNonnegativeNonnilpotent;
        out.witness_power = k0;
        return out;
      }
    }
  }
  out.tag = out.weak_perron_frobenius ? MatrixClassTag::kWpfOnly
                                      : MatrixClassTag::kNone;
  return out;
}

}  // namespace evpos::spectral
