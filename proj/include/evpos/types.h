#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace evpos {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

enum class ErrorCode {
  kNonSquare,
  kNonFinite,
  kDimensionMismatch,
  kNotDiagonalizable,
  kOverflow,
  kNotHurwitz,
  kSingularSystem,
  kNotApplicable,
  kPreconditionFailed,
  kDegenerateW,
  kSingularTransform,
  kNotMetzler,
  kNotStable,
  kNotSiso,
  kNotInternallyEventuallyPositive,
  kInvalidDirection,
  kPremiseFailed,
  kSingularExp,
  kSchemaError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Throws kNonFinite if any entry is NaN or Inf.
void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view name);

/// Throws kNonSquare unless m is square.
void require_square(const Eigen::Ref<const Matrix>& m, std::string_view name);

/// Smallest entry of m divided by its largest absolute entry; 0 for a zero
/// matrix. Sign checks on e^{At} use this so that decay or growth of the flow
/// does not move the tolerance.
double min_relative_entry(const Eigen::Ref<const Matrix>& m);

}  // namespace evpos
