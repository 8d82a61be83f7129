#include <limits>

#include "evpos/linalg.h"

namespace evpos::linalg {

StrictWitness find_strict_witness(const StrictFeasibilityProblem& problem,
                                  double threshold) {
  const Matrix& m = problem.m;
  require_finite(m, "M");
  const int q = static_cast<int>(m.rows());
  const int p = static_cast<int>(m.cols());
  if (static_cast<int>(problem.positive.size()) != p) {
    throw Error(ErrorCode::kDimensionMismatch,
                "positivity mask length differs from the column count of M");
  }
  std::vector<int> positive_cols;
  for (int j = 0; j < p; ++j) {
    if (problem.positive[j]) positive_cols.push_back(j);
  }
  const int n_pos = static_cast<int>(positive_cols.size());
  const int strict_rows = q + n_pos;

  StrictWitness out;
  if (strict_rows == 0) {
    out.status = WitnessStatus::kUnbounded;
    out.x = Vector::Zero(p);
    out.margin = std::numeric_limits<double>::infinity();
    return out;
  }

  // Variables z = [x+ (p), x- (p), eps]; x = x+ - x-.
  const int n_var = 2 * p + 1;
  const int eps = 2 * p;
  const int n_rows = strict_rows + 2 * p + 1;
  LinearProgram lp;
  lp.g = Matrix::Zero(n_rows, n_var);
  lp.h = Vector::Zero(n_rows);
  lp.c = Vector::Zero(n_var);
  lp.c(eps) = 1.0;

  int row = 0;
  for (int i = 0; i < q; ++i, ++row) {
    lp.g.row(row).head(p) = m.row(i);
    lp.g.row(row).segment(p, p) = -m.row(i);
    lp.g(row, eps) = 1.0;
  }
  for (int j : positive_cols) {
    lp.g(row, j) = -1.0;
    lp.g(row, p + j) = 1.0;
    lp.g(row, eps) = 1.0;
    ++row;
  }
  for (int j = 0; j < 2 * p; ++j, ++row) {
    lp.g(row, j) = 1.0;
    lp.h(row) = 1.0;
  }
  // Never active while at least one strict row exists.
  lp.g(row, eps) = 1.0;
  lp.h(row) = 1.0 + m.cwiseAbs().sum();

  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::kOptimal) {
    throw Error(ErrorCode::kSingularSystem, "margin LP did not terminate");
  }
  const Vector x = res.x.head(p) - res.x.segment(p, p);
  out.x = x;
  out.margin = res.x(eps);
  if (out.margin > threshold) {
    out.status = WitnessStatus::kFeasible;
    return out;
  }

  out.status = WitnessStatus::kInfeasible;
  Vector y = res.dual.head(strict_rows).cwiseMax(0.0);
  const double total = y.sum();
  if (total > 0.0) y /= total;
  out.separating = y;
  Vector combo = m.transpose() * y.head(q);
  for (int k = 0; k < n_pos; ++k) combo(positive_cols[k]) -= y(q + k);
  out.separating_residual = combo.size() ? combo.lpNorm<Eigen::Infinity>() : 0.0;
  return out;
}

}  // namespace evpos::linalg
