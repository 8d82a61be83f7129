#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "evpos/linalg.h"

namespace evpos::linalg {

namespace {

constexpr double kMaxEigenvectorCondition = 1e8;

}  // namespace

bool EigenSystem::is_real(int i, double tol) const {
  return std::abs(values(i).imag()) <= tol * std::max(1.0, std::abs(values(i)));
}

EigenSystem eigensystem(const Eigen::Ref<const Matrix>& a, double tol) {
  require_square(a, "A");
  require_finite(a, "A");
  const int n = static_cast<int>(a.rows());
  EigenSystem out;
  if (n == 0) return out;

  // Hessenberg reduction + shifted QR (real Schur form) inside Eigen.
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotDiagonalizable, "QR iteration did not converge");
  }
  const ComplexVector raw_values = solver.eigenvalues();
  const ComplexMatrix raw_vectors = solver.eigenvectors();

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    const Complex a_i = raw_values(i), a_j = raw_values(j);
    if (a_i.real() != a_j.real()) return a_i.real() > a_j.real();
    if (std::abs(a_i.imag()) != std::abs(a_j.imag())) {
      return std::abs(a_i.imag()) < std::abs(a_j.imag());
    }
    return a_i.imag() > a_j.imag();
  });

  out.values.resize(n);
  out.right.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values(k) = raw_values(order[k]);
    ComplexVector v = raw_vectors.col(order[k]);
    if (out.values(k).imag() == 0.0) v = v.real().cast<Complex>();
    const double norm = v.norm();
    if (norm == 0.0) {
      throw Error(ErrorCode::kNotDiagonalizable, "zero eigenvector returned");
    }
    out.right.col(k) = v / norm;
  }

  Eigen::JacobiSVD<ComplexMatrix> svd(out.right);
  const auto& sv = svd.singularValues();
  out.condition_number =
      sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : std::numeric_limits<double>::infinity();
  if (!(out.condition_number <= kMaxEigenvectorCondition)) {
    throw Error(ErrorCode::kNotDiagonalizable,
                "eigenvector matrix condition number " +
                    std::to_string(out.condition_number) + " exceeds 1e8");
  }

  const ComplexMatrix inverse = out.right.fullPivLu().inverse();
  out.left = inverse.adjoint();
  for (int k = 0; k < n; ++k) {
    if (out.values(k).imag() == 0.0) {
      out.left.col(k) = out.left.col(k).real().cast<Complex>();
    } else if (out.values(k).imag() > 0.0 && k + 1 < n &&
               out.values(k + 1) == std::conj(out.values(k))) {
      out.right.col(k + 1) = out.right.col(k).conjugate();
      out.left.col(k + 1) = out.left.col(k).conjugate();
    }
  }

  const ComplexMatrix ac = a.cast<Complex>();
  double residual = 0.0;
  for (int k = 0; k < n; ++k) {
    residual = std::max(
        residual, (ac * out.right.col(k) - out.values(k) * out.right.col(k)).norm());
  }
  out.residual_norm = residual;
  const double scale = std::max(1.0, a.lpNorm<Eigen::Infinity>());
  if (residual > tol * scale) {
    throw Error(ErrorCode::kNotDiagonalizable,
                "eigenvector residual " + std::to_string(residual) +
                    " exceeds tolerance");
  }
  return out;
}

bool dominant_real_part_tie(const EigenSystem& eig, double tol) {
  const int n = eig.size();
  if (n < 2) return false;
  const Complex lead = eig.values(0);
  int next = 1;
  if (lead.imag() != 0.0 && eig.values(1) == std::conj(lead)) next = 2;
  if (next >= n) return false;
  const double scale = std::max(1.0, std::abs(lead));
  return std::abs(eig.values(next).real() - lead.real()) <= tol * scale;
}

double spectral_abscissa(const Eigen::Ref<const Matrix>& a) {
  require_square(a, "A");
  require_finite(a, "A");
  if (a.rows() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  return solver.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Eigen::Ref<const Matrix>& a) {
  return spectral_abscissa(a) < 0.0;
}

}  // namespace evpos::linalg
