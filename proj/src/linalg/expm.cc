#include <cmath>

#include <Eigen/LU>

#include "evpos/linalg.h"

namespace evpos::linalg {

namespace {

// Degree-13 Pade coefficients and the 1-norm threshold below which the
// approximant is accurate to unit roundoff without scaling.
constexpr double kPade13[] = {64764752532480000.0,
                              32382376266240000.0,
                              7771770303897600.0,
                              1187353796428800.0,
                              129060195264000.0,
                              10559470521600.0,
                              670442572800.0,
                              33522128640.0,
                              1323241920.0,
                              40840800.0,
                              960960.0,
                              16380.0,
                              182.0,
                              1.0};
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

Matrix expm(const Eigen::Ref<const Matrix>& a, double t) {
  require_square(a, "A");
  require_finite(a, "A");
  if (!std::isfinite(t)) throw Error(ErrorCode::kNonFinite, "t is not finite");
  const Eigen::Index n = a.rows();
  if (n == 0) return Matrix(0, 0);

  Matrix at = a * t;
  const double norm1 = at.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
    at /= std::ldexp(1.0, squarings);
  }

  const Matrix id = Matrix::Identity(n, n);
  const Matrix a2 = at * at;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const double* b = kPade13;
  const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) +
                         b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  const Matrix u = at * u_inner;
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                   b[4] * a4 + b[2] * a2 + b[0] * id;

  Matrix result = (v - u).partialPivLu().solve(u + v);
  for (int k = 0; k < squarings; ++k) {
    result = result * result;
    if (!result.allFinite()) break;
  }
  if (!result.allFinite()) {
    throw Error(ErrorCode::kOverflow, "e^{At} exceeds the floating range");
  }
  return result;
}

}  // namespace evpos::linalg
