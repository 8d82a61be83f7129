#include <algorithm>
#include <cmath>

#include "evpos/iosys.h"
#include "evpos/linalg.h"

namespace evpos::iosys {

namespace {

// [Phi, Gamma] with Phi = e^{Ah} and Gamma = (int_0^h e^{As} ds) B, read off
// the exponential of the augmented matrix [[A, B], [0, 0]].
struct Step {
  Matrix phi;
  Matrix gamma;
};

Step discretize(const LtiSystem& sys, double h) {
  const int n = sys.n();
  const int m = sys.m();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = sys.a;
  aug.topRightCorner(n, m) = sys.b;
  const Matrix e = linalg::expm(aug, h);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

}  // namespace

InputSchedule InputSchedule::constant(const Vector& u) {
  InputSchedule s;
  s.times.push_back(0.0);
  s.values.push_back(u);
  return s;
}

const Vector& InputSchedule::at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const size_t idx = it == times.begin() ? 0 : static_cast<size_t>(it - times.begin()) - 1;
  return values[idx];
}

Trajectory simulate(const LtiSystem& sys, const Vector& x0, const InputSchedule& input,
                    double horizon, double step) {
  sys.validate();
  if (x0.size() != sys.n()) throw Error(ErrorCode::kDimensionMismatch, "x0 has wrong length");
  if (input.times.empty() || input.times.size() != input.values.size() ||
      input.times.front() != 0.0 || !std::is_sorted(input.times.begin(), input.times.end())) {
    throw Error(ErrorCode::kSchemaError, "input schedule must start at t = 0 and be sorted");
  }
  for (const Vector& u : input.values) {
    if (u.size() != sys.m()) throw Error(ErrorCode::kDimensionMismatch, "input has wrong length");
    require_finite(u, "u");
  }
  require_finite(x0, "x0");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::kSchemaError, "horizon must be a finite nonnegative number");
  }
  if (!(step > 0.0)) throw Error(ErrorCode::kSchemaError, "step must be positive");

  std::vector<double> grid{0.0};
  for (long k = 1;; ++k) {
    const double t = k * step;
    if (t >= horizon - 1e-12 * std::max(1.0, horizon)) {
      if (horizon > 0.0) grid.push_back(horizon);
      break;
    }
    grid.push_back(t);
  }

  const Step full = discretize(sys, step);
  Trajectory traj;
  Vector x = x0;
  auto record = [&](double t) {
    traj.t.push_back(t);
    traj.x.push_back(x);
    traj.y.push_back(sys.c * x + sys.d * input.at(t));
  };
  record(0.0);
  for (size_t k = 1; k < grid.size(); ++k) {
    double t = grid[k - 1];
    const double target = grid[k];
    // Break the interval at input switches.
    std::vector<double> cuts;
    for (double s : input.times) {
      if (s > t && s < target) cuts.push_back(s);
    }
    cuts.push_back(target);
    for (double cut : cuts) {
      const double h = cut - t;
      const Vector& u = input.at(t);
      if (cuts.size() == 1 && std::abs(h - step) <= 1e-14 * step) {
        x = full.phi * x + full.gamma * u;
      } else {
        const Step part = discretize(sys, h);
        x = part.phi * x + part.gamma * u;
      }
      t = cut;
    }
    record(target);
  }
  return traj;
}

}  // namespace evpos::iosys
