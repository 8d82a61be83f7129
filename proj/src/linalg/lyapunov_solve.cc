#include <string>

#include <Eigen/LU>

#include "evpos/linalg.h"

namespace evpos::linalg {

namespace {

Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return out;
}

}  // namespace

Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& a,
                      const Eigen::Ref<const Matrix>& rhs, LyapunovSide side) {
  require_square(a, "A");
  require_square(rhs, "RHS");
  require_finite(a, "A");
  require_finite(rhs, "RHS");
  if (rhs.rows() != a.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "RHS and A differ in size");
  }
  const Eigen::Index n = a.rows();
  if (n == 0) return Matrix(0, 0);
  const double abscissa = spectral_abscissa(a);
  if (!(abscissa < 0.0)) {
    throw Error(ErrorCode::kNotHurwitz,
                "spectral abscissa " + std::to_string(abscissa) + " >= 0");
  }

  // Column-major vec: vec(X Y Z) = (Z^T kron X) vec(Y).
  const Matrix id = Matrix::Identity(n, n);
  const Matrix op = side == LyapunovSide::kLeft
                        ? Matrix(kron(id, a.transpose()) + kron(a.transpose(), id))
                        : Matrix(kron(id, a) + kron(a, id));
  Eigen::PartialPivLU<Matrix> lu(op);
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorCode::kSingularSystem,
                "Kronecker operator is numerically singular");
  }
  const Matrix neg_rhs = -rhs;
  const Vector solution =
      lu.solve(Eigen::Map<const Vector>(neg_rhs.data(), n * n));
  Matrix x = Eigen::Map<const Matrix>(solution.data(), n, n);

  const double rhs_scale = rhs.cwiseAbs().maxCoeff();
  if ((rhs - rhs.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * rhs_scale) {
    x = 0.5 * (x + x.transpose()).eval();
  }
  return x;
}

}  // namespace evpos::linalg
