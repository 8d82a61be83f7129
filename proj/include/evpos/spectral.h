#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "evpos/linalg.h"
#include "evpos/types.h"

namespace evpos::spectral {

enum class SystemClass {
  kPositive,
  kStronglyEventuallyPositive,
  /// Real dominant eigenvalue with nonnegative (not strictly positive)
  /// dominant vectors. Necessary for eventual positivity but not sufficient,
  /// so the verdict also carries a sampling outcome.
  kEventuallyPositiveNecessaryOnly,
  kNotEventuallyPositive,
};

enum class OracleOutcome { kNotRun, kHolds, kFails };

std::string_view to_string(SystemClass c);
std::string_view to_string(OracleOutcome o);

/// Sample times with the smallest entry of e^{At} (relative to its largest
/// absolute entry) at each time.
struct GridEvidence {
  std::vector<double> times;
  std::vector<double> min_entries;
};

struct ClassifyOptions {
  /// Eigen-residual tolerance; also the relative gap below which real parts
  /// are treated as tied and eigenvector entries as zero.
  double tol = 1e-8;
  /// Entrywise "e^{At} >= 0" tolerance.
  double entry_tol = 1e-9;
  /// Grid step for the exponential index; <= 0 picks min(0.01, T*/1000).
  double grid_step = 0.0;
};

struct SpectralVerdict {
  SystemClass kind = SystemClass::kNotEventuallyPositive;
  std::string reason;
  Complex dominant_value;
  /// Dominant right/left eigenvectors scaled so that max |v_i| = v_k = +1 and
  /// w^T v = 1. Empty when the dominant eigenvalue is not real.
  Vector dominant_right;
  Vector dominant_left;
  /// Smallest real-part gap lambda_1 - Re lambda_j, j >= 2 (infinity for n=1).
  double spectral_gap = 0.0;
  /// lambda_1 is real, simple, and strictly dominant in real part.
  bool simple_real_dominant = false;
  double exponential_index_upper = 0.0;
  double certified_tail_time = 0.0;
  GridEvidence grid;
  OracleOutcome sampling_oracle = OracleOutcome::kNotRun;
  double entry_tol = 1e-9;
  /// Empty when A was Metzler but defective.
  linalg::EigenSystem eig;
  bool has_eigensystem = false;
};

/// Positive / strongly eventually positive / necessary-only / not
/// eventually positive, decided from the dominant eigenpair.
SpectralVerdict classify_system(const Eigen::Ref<const Matrix>& a,
                                const ClassifyOptions& options = {});

struct ExponentialIndex {
  /// Upper estimate of the uniform exponential index.
  double tau = 0.0;
  /// Analytic time after which e^{At} >> 0 is guaranteed by the modal bound.
  double tail_time = 0.0;
  GridEvidence coarse;
  GridEvidence fine;
};

/// Uniform exponential index of a positive or strongly eventually positive
/// system. Throws kNotApplicable for the other classes.
ExponentialIndex exponential_index(const Eigen::Ref<const Matrix>& a,
                                   const SpectralVerdict& verdict,
                                   double grid_step = 0.0);

/// Smallest T with sum_{i>=2} e^{(Re lambda_i - lambda_1) T} c_i below
/// minEntry(v1 w1^T), where c_i bounds the entries of the i-th spectral
/// projector. Requires positive dominant vectors.
double modal_tail_time(const linalg::EigenSystem& eig, const Vector& v1,
                       const Vector& w1);

enum class MatrixClassTag {
  kEventuallyPositiveMatrix,
  kEventuallyNonnegativeNonnilpotent,
  kWpfOnly,
  kNone,
};

std::string_view to_string(MatrixClassTag t);

struct MatrixClass {
  MatrixClassTag tag = MatrixClassTag::kNone;
  /// K such that every sampled power in [K, 2K] has the property; 0 if none.
  int witness_power = 0;
  bool nilpotent = false;
  bool weak_perron_frobenius = false;
};

/// Places a matrix in the chain PF_n = eventually positive
///   subset nonnilpotent eventually nonnegative subset WPF_n
/// by direct inspection of A^k, k <= 2 * max_k.
MatrixClass classify_matrix_powers(const Eigen::Ref<const Matrix>& a, int max_k);

/// A and A^T both have a nonnegative eigenvector for the spectral radius.
bool has_weak_perron_frobenius(const Eigen::Ref<const Matrix>& a);

bool is_metzler(const Eigen::Ref<const Matrix>& a, double tol = 1e-12);

/// Strong connectivity of the off-diagonal support digraph (|a_ij| > tol).
bool is_irreducible(const Eigen::Ref<const Matrix>& a, double tol = 0.0);

}  // namespace evpos::spectral
