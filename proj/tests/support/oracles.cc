#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracle {

namespace {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LComplex = std::complex<long double>;

Matrix simpson_step(const std::function<Matrix(double)>& f, double a, double b,
                    const Matrix& fa, const Matrix& fm, const Matrix& fb, const Matrix& whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const Matrix flm = f(0.5 * (a + m));
  const Matrix frm = f(0.5 * (m + b));
  const Matrix left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Matrix right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Matrix diff = left + right - whole;
  if (depth <= 0 || diff.cwiseAbs().maxCoeff() <= 15.0 * tol) {
    return left + right + diff / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

Matrix taylor_expm(const Matrix& a, double t) {
  const Eigen::Index n = a.rows();
  LMatrix x = (a * t).cast<long double>();
  long double norm = 0.0L;
  for (Eigen::Index r = 0; r < n; ++r) {
    long double row = 0.0L;
    for (Eigen::Index c = 0; c < n; ++c) row += std::fabs(x(r, c));
    norm = std::max(norm, row);
  }
  int squarings = 0;
  while (norm > 0.5L) {
    norm /= 2.0L;
    ++squarings;
  }
  x /= std::ldexp(1.0L, squarings);
  LMatrix sum = LMatrix::Identity(n, n);
  LMatrix term = LMatrix::Identity(n, n);
  for (int k = 1; k <= 60; ++k) {
    term = term * x / static_cast<long double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum.cast<double>();
}

std::vector<std::complex<double>> char_poly_roots(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  const LMatrix al = a.cast<long double>();
  // coeff[k] multiplies z^k; monic.
  std::vector<long double> coeff(n + 1, 0.0L);
  coeff[n] = 1.0L;
  LMatrix m = LMatrix::Zero(n, n);
  for (int k = 1; k <= n; ++k) {
    m = al * m + coeff[n - k + 1] * LMatrix::Identity(n, n);
    coeff[n - k] = -(al * m).trace() / static_cast<long double>(k);
  }
  auto poly = [&](LComplex z) {
    LComplex acc = 0.0L;
    for (int k = n; k >= 0; --k) acc = acc * z + coeff[k];
    return acc;
  };
  auto dpoly = [&](LComplex z) {
    LComplex acc = 0.0L;
    for (int k = n; k >= 1; --k) acc = acc * z + static_cast<long double>(k) * coeff[k];
    return acc;
  };
  long double radius = 1.0L;
  for (int k = 0; k < n; ++k) radius = std::max(radius, 1.0L + std::fabs(coeff[k]));
  std::vector<LComplex> z(n);
  const LComplex seed(0.4L, 0.9L);
  for (int i = 0; i < n; ++i) z[i] = radius * std::pow(seed, i) / std::abs(std::pow(seed, i));
  for (int it = 0; it < 2000; ++it) {
    long double change = 0.0L;
    for (int i = 0; i < n; ++i) {
      LComplex denom = 1.0L;
      for (int j = 0; j < n; ++j) {
        if (j != i) denom *= z[i] - z[j];
      }
      const LComplex step = poly(z[i]) / denom;
      z[i] -= step;
      change = std::max(change, std::abs(step));
    }
    if (change < 1e-30L) break;
  }
  for (int i = 0; i < n; ++i) {
    for (int it = 0; it < 5; ++it) {
      const LComplex d = dpoly(z[i]);
      if (std::abs(d) == 0.0L) break;
      z[i] -= poly(z[i]) / d;
    }
  }
  std::vector<std::complex<double>> out;
  for (const LComplex& r : z) {
    out.emplace_back(static_cast<double>(r.real()), static_cast<double>(r.imag()));
  }
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
    if (l.real() != r.real()) return l.real() > r.real();
    return l.imag() > r.imag();
  });
  return out;
}

Matrix integrate(const std::function<Matrix(double)>& f, double a, double b, double tol) {
  const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / 0.5)));
  const double h = (b - a) / pieces;
  Matrix total;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + p * h;
    const double hi = p + 1 == pieces ? b : lo + h;
    const Matrix fa = f(lo), fm = f(0.5 * (lo + hi)), fb = f(hi);
    const Matrix whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    const Matrix piece = simpson_step(f, lo, hi, fa, fm, fb, whole, tol / pieces, 40);
    total = p == 0 ? piece : Matrix(total + piece);
  }
  return total;
}

double integrate_scalar(const std::function<double(double)>& f, double a, double b,
                        double tol) {
  return integrate([&](double t) { return Matrix::Constant(1, 1, f(t)); }, a, b, tol)(0, 0);
}

bool brute_force_irreducible(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  if (n <= 1) return true;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    for (int k = 1; k < n; ++k) {
      // Lower-left (n-k) x k block of P A P^T.
      bool zero = true;
      for (int r = k; r < n && zero; ++r) {
        for (int c = 0; c < k && zero; ++c) {
          if (a(perm[r], perm[c]) != 0.0) zero = false;
        }
      }
      if (zero) return false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return true;
}

std::vector<std::vector<std::vector<long long>>> integer_powers(const Matrix& a, int max_k) {
  const int n = static_cast<int>(a.rows());
  std::vector<std::vector<long long>> base(n, std::vector<long long>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) base[r][c] = std::llround(a(r, c));
  }
  std::vector<std::vector<std::vector<long long>>> out{base};
  for (int k = 2; k <= max_k; ++k) {
    const auto& prev = out.back();
    std::vector<std::vector<long long>> next(n, std::vector<long long>(n, 0));
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        for (int j = 0; j < n; ++j) next[r][c] += prev[r][j] * base[j][c];
      }
    }
    out.push_back(std::move(next));
  }
  return out;
}

double window_min_entry(const Matrix& a, double start, double length, double step) {
  const int steps = static_cast<int>(std::llround(length / step));
  // Flow of A - Re(lambda_1) I, renormalized after every step.
  const double shift = char_poly_roots(a).front().real();
  const Matrix shifted = a - shift * Matrix::Identity(a.rows(), a.cols());
  const Matrix e_step = taylor_expm(shifted, step);
  Matrix e = taylor_expm(shifted, start);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= steps; ++k) {
    const double scale = e.cwiseAbs().maxCoeff();
    worst = std::min(worst, e.minCoeff() / scale);
    e = e_step * (e / scale);
  }
  return worst;
}

Matrix random_stable_metzler(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix a = Matrix::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      if (r != c && unit(rng) < 0.7) a(r, c) = unit(rng);
    }
  }
  for (int r = 0; r < n; ++r) a(r, r) = -(a.row(r).sum() + 0.1 + unit(rng));
  return a;
}

Matrix random_rank_one_dominant(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.1, 1.0);
  std::normal_distribution<double> gauss;
  Vector v(n), w(n);
  for (int i = 0; i < n; ++i) {
    v(i) = pos(rng);
    w(i) = pos(rng);
  }
  const double sigma = 2.0 + n;
  Matrix a = sigma * v * w.transpose();
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) a(r, c) += 0.6 * gauss(rng);
  }
  return a;
}

Matrix random_gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Matrix a(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) a(r, c) = gauss(rng);
  }
  return a;
}

Matrix positive_image(const Matrix& a, double tau, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix x(a.rows(), cols);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) x(r, c) = unit(rng);
  }
  return taylor_expm(a, tau) * x;
}

Matrix reference_matrix() {
  Matrix a(3, 3);
  a << -6, 10, 4, -7, 2, 12, 3, -3, -4;
  return a;
}

}  // namespace oracle
