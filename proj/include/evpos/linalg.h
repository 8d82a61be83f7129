#pragma once

#include <vector>

#include "evpos/types.h"

namespace evpos::linalg {

/// Right and left eigenvectors of a diagonalizable real matrix, biorthogonally
/// normalized so that left.adjoint() * right = I.
///
/// Eigenvalues are sorted by descending real part. Conjugate pairs are stored
/// adjacently with the positive imaginary part first, and for real eigenvalues
/// both vectors are real. The decomposition reads
///   A = right * diag(values) * left.adjoint().
struct EigenSystem {
  ComplexVector values;
  ComplexMatrix right;
  ComplexMatrix left;
  /// Largest ||A v - lambda v||_2 over unit-norm right eigenvectors.
  double residual_norm = 0.0;
  /// 2-norm condition number of the right eigenvector matrix.
  double condition_number = 1.0;

  int size() const { return static_cast<int>(values.size()); }
  bool is_real(int i, double tol) const;
};

/// Computes the eigensystem of a square matrix.
///
/// Throws kNonSquare, kNonFinite, or kNotDiagonalizable. The latter fires when
/// the eigenvector matrix has condition number above 1e8 or some residual
/// exceeds tol * max(1, ||A||).
EigenSystem eigensystem(const Eigen::Ref<const Matrix>& a, double tol = 1e-8);

/// True when some eigenvalue other than the first shares its real part within
/// tol (conjugate partner excluded).
bool dominant_real_part_tie(const EigenSystem& eig, double tol);

/// e^{A t} by scaling and squaring with a degree-13 Pade approximant.
/// Throws kOverflow when the result is not representable.
Matrix expm(const Eigen::Ref<const Matrix>& a, double t = 1.0);

/// Largest real part among the eigenvalues (no diagonalizability needed).
double spectral_abscissa(const Eigen::Ref<const Matrix>& a);

bool is_hurwitz(const Eigen::Ref<const Matrix>& a);

enum class LyapunovSide {
  kLeft,   // A^T X + X A + RHS = 0
  kRight,  // A X + X A^T + RHS = 0
};

/// Solves a continuous Lyapunov equation through the n^2 x n^2 Kronecker
/// system. The cost is O(n^6), fine for n up to a few dozen.
/// Throws kNotHurwitz or kSingularSystem.
Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& a,
                      const Eigen::Ref<const Matrix>& rhs, LyapunovSide side);

// ---------------------------------------------------------------------------
// Linear programming.

/// maximize c^T x  subject to  G x <= h,  x >= 0.
struct LinearProgram {
  Matrix g;
  Vector h;
  Vector c;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Vector x;
  /// Optimal multipliers of the rows of G (nonnegative), valid when kOptimal.
  Vector dual;
  double objective = 0.0;
};

/// Dense two-phase tableau simplex with Bland's rule.
LpResult solve_lp(const LinearProgram& lp);

/// Find x with M x << 0 and x_j >> 0 for every j flagged positive.
///
/// Solved as: maximize eps s.t. M x <= -eps 1, x_j >= eps (flagged j),
/// ||x||_inf <= 1. A margin at or below the feasibility threshold counts as
/// infeasible.
struct StrictFeasibilityProblem {
  Matrix m;
  std::vector<bool> positive;
};

enum class WitnessStatus { kFeasible, kInfeasible, kUnbounded };

struct StrictWitness {
  WitnessStatus status = WitnessStatus::kInfeasible;
  Vector x;
  double margin = 0.0;
  /// Gordan alternative when infeasible: y >= 0 over the rows of M followed by
  /// one entry per positive variable, with sum 1 and M^T y_M - E^T y_P ~ 0.
  Vector separating;
  /// Residual ||M^T y_M - E^T y_P||_inf of the separating vector.
  double separating_residual = 0.0;
};

StrictWitness find_strict_witness(const StrictFeasibilityProblem& problem,
                                  double threshold = 1e-9);

}  // namespace evpos::linalg
