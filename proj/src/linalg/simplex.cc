#include <cmath>
#include <limits>
#include <vector>

#include "evpos/linalg.h"

namespace evpos::linalg {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-11;
constexpr int kMaxIterations = 100000;

// Equality-form tableau B^{-1}[A | b] with an attached reduced-cost row.
class Tableau {
 public:
  Tableau(Matrix body, std::vector<int> basis)
      : t_(std::move(body)), basis_(std::move(basis)) {}

  int rows() const { return static_cast<int>(t_.rows()); }
  int cols() const { return static_cast<int>(t_.cols()) - 1; }
  double rhs(int i) const { return t_(i, cols()); }
  double at(int i, int j) const { return t_(i, j); }
  int basic(int i) const { return basis_[i]; }
  const Vector& reduced_costs() const { return reduced_; }
  double objective() const { return objective_; }

  // Loads the cost vector and prices out the current basis.
  void set_cost(const Vector& cost) {
    cost_ = cost;
    reduced_ = cost;
    objective_ = 0.0;
    for (int i = 0; i < rows(); ++i) {
      const double cb = cost(basis_[i]);
      if (cb != 0.0) {
        reduced_ -= cb * t_.row(i).head(cols()).transpose();
        objective_ += cb * rhs(i);
      }
    }
  }

  // Bland's rule: lowest-index entering column, lowest-index leaving basic
  // variable among ratio ties.
  LpStatus run(const std::vector<bool>& allowed) {
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      int enter = -1;
      for (int j = 0; j < cols(); ++j) {
        if (allowed[j] && reduced_(j) > kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::kOptimal;

      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows(); ++i) {
        const double coef = t_(i, enter);
        if (coef <= kPivotTol) continue;
        const double ratio = rhs(i) / coef;
        if (ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      pivot(leave, enter);
    }
    return LpStatus::kInfeasible;
  }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i < rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    const double f = reduced_(c);
    if (f != 0.0) {
      reduced_ -= f * t_.row(r).head(cols()).transpose();
      objective_ += f * rhs(r);
    }
    basis_[r] = c;
  }

  void drop_row(int r) {
    const int last = rows() - 1;
    if (r != last) {
      t_.row(r) = t_.row(last);
      basis_[r] = basis_[last];
    }
    t_.conservativeResize(last, Eigen::NoChange);
    basis_.pop_back();
  }

 private:
  Matrix t_;
  std::vector<int> basis_;
  Vector cost_;
  Vector reduced_;
  double objective_ = 0.0;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const int m = static_cast<int>(lp.g.rows());
  const int n = static_cast<int>(lp.g.cols());
  if (lp.h.size() != m || lp.c.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "LP data has inconsistent sizes");
  }

  // Columns: structural [0, n), slacks [n, n+m), artificials after that.
  std::vector<int> negated_rows;
  for (int i = 0; i < m; ++i) {
    if (lp.h(i) < 0.0) negated_rows.push_back(i);
  }
  const int n_art = static_cast<int>(negated_rows.size());
  const int cols = n + m + n_art;

  Matrix body = Matrix::Zero(m, cols + 1);
  std::vector<int> basis(m);
  int art = 0;
  for (int i = 0; i < m; ++i) {
    const double sign = lp.h(i) < 0.0 ? -1.0 : 1.0;
    body.row(i).head(n) = sign * lp.g.row(i);
    body(i, n + i) = sign;
    body(i, cols) = sign * lp.h(i);
    if (sign < 0.0) {
      body(i, n + m + art) = 1.0;
      basis[i] = n + m + art;
      ++art;
    } else {
      basis[i] = n + i;
    }
  }
  Tableau tab(std::move(body), std::move(basis));
  std::vector<bool> allowed(cols, true);

  if (n_art > 0) {
    Vector phase1 = Vector::Zero(cols);
    phase1.tail(n_art).setConstant(-1.0);
    tab.set_cost(phase1);
    if (tab.run(allowed) != LpStatus::kOptimal || tab.objective() < -1e-9) {
      return LpResult{LpStatus::kInfeasible, {}, {}, 0.0};
    }
    // Drive remaining artificials out of the basis; rows where that is
    // impossible are redundant.
    for (int i = tab.rows() - 1; i >= 0; --i) {
      if (tab.basic(i) < n + m) continue;
      int col = -1;
      for (int j = 0; j < n + m; ++j) {
        if (std::abs(tab.at(i, j)) > kPivotTol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        tab.pivot(i, col);
      } else {
        tab.drop_row(i);
      }
    }
    for (int j = n + m; j < cols; ++j) allowed[j] = false;
  }

  Vector cost = Vector::Zero(cols);
  cost.head(n) = lp.c;
  tab.set_cost(cost);
  const LpStatus status = tab.run(allowed);

  LpResult result;
  result.status = status;
  if (status != LpStatus::kOptimal) return result;
  result.x = Vector::Zero(n);
  for (int i = 0; i < tab.rows(); ++i) {
    if (tab.basic(i) < n) result.x(tab.basic(i)) = tab.rhs(i);
  }
  result.objective = lp.c.dot(result.x);
  result.dual = -tab.reduced_costs().segment(n, m);
  return result;
}

}  // namespace evpos::linalg
