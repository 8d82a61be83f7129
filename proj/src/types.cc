#include "evpos/types.h"

#include <cmath>

namespace evpos {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonSquare: return "NonSquare";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotDiagonalizable: return "NotDiagonalizable";
    case ErrorCode::kOverflow: return "Overflow";
    case ErrorCode::kNotHurwitz: return "NotHurwitz";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kNotApplicable: return "NotApplicable";
    case ErrorCode::kPreconditionFailed: return "PreconditionFailed";
    case ErrorCode::kDegenerateW: return "DegenerateW";
    case ErrorCode::kSingularTransform: return "SingularTransform";
    case ErrorCode::kNotMetzler: return "NotMetzler";
    case ErrorCode::kNotStable: return "NotStable";
    case ErrorCode::kNotSiso: return "NotSiso";
    case ErrorCode::kNotInternallyEventuallyPositive:
      return "NotInternallyEventuallyPositive";
    case ErrorCode::kInvalidDirection: return "InvalidDirection";
    case ErrorCode::kPremiseFailed: return "PremiseFailed";
    case ErrorCode::kSingularExp: return "SingularExp";
    case ErrorCode::kSchemaError: return "SchemaError";
  }
  return "Unknown";
}

void require_finite(const Eigen::Ref<const Matrix>& m, std::string_view name) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonFinite,
                std::string(name) + " has non-finite entries");
  }
}

void require_square(const Eigen::Ref<const Matrix>& m, std::string_view name) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kNonSquare,
                std::string(name) + " is " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()) + ", expected square");
  }
}

double min_relative_entry(const Eigen::Ref<const Matrix>& m) {
  if (m.size() == 0) return 0.0;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return m.minCoeff() / scale;
}

}  // namespace evpos
