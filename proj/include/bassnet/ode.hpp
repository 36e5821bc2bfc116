#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

namespace bassnet {

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 picks a step from the initial derivative
  double min_step = 1e-14;    // relative to the integration span
  long max_steps = 50'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
};

/// Error from the adaptive integrator (step size underflow or step budget exhausted).
class OdeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive Dormand-Prince 5(4) integrator.
///
/// Integrates y' = rhs(t, y) from times.front() and calls `observe(i, y)` at
/// every requested time, including the first. Steps are shortened so that each
/// output time is hit exactly rather than interpolated.
template <typename Scalar, typename Rhs, typename Observer>
OdeStats integrate_dopri5(Rhs&& rhs, Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y, std::span<const double> times,
                          Observer&& observe, const OdeOptions& opts = {}) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  OdeStats stats;
  if (times.empty()) return stats;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("output times must be strictly increasing");
  }

  // Butcher tableau.
  constexpr Scalar c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr Scalar a21 = 1.0 / 5;
  constexpr Scalar a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr Scalar a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr Scalar a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr Scalar a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr Scalar b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - b_hat (error weights).
  constexpr Scalar e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  const Eigen::Index n = y.size();
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n), err(n);

  auto eval = [&](double t, const Vec& state, Vec& out) {
    rhs(t, state, out);
    ++stats.rhs_evaluations;
  };

  double t = times.front();
  observe(std::size_t{0}, static_cast<const Vec&>(y));
  if (times.size() == 1) return stats;

  const double span = times.back() - times.front();
  const double min_step = opts.min_step * std::max(span, 1.0);
  eval(t, y, k1);

  double h = opts.initial_step;
  if (!(h > 0.0)) {
    const double d0 = static_cast<double>(y.cwiseAbs().maxCoeff());
    const double d1 = static_cast<double>(k1.cwiseAbs().maxCoeff());
    h = (d1 > 0.0) ? 0.01 * std::max(d0, opts.atol) / d1 : 1e-6 * span;
    h = std::clamp(h, min_step, span);
  }

  for (std::size_t next = 1; next < times.size(); ++next) {
    const double target = times[next];
    while (t < target) {
      if (stats.accepted + stats.rejected >= opts.max_steps) throw OdeError("step budget exhausted");
      bool last = false;
      double step = h;
      if (t + step >= target || target - (t + step) < min_step) {
        step = target - t;
        last = true;
      }

      const Scalar hs(step);
      tmp = y + hs * a21 * k1;
      eval(t + c2 * step, tmp, k2);
      tmp = y + hs * (a31 * k1 + a32 * k2);
      eval(t + c3 * step, tmp, k3);
      tmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
      eval(t + c4 * step, tmp, k4);
      tmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      eval(t + c5 * step, tmp, k5);
      tmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      eval(t + step, tmp, k6);
      y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      eval(t + step, y_new, k7);
      err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const auto scale = (Scalar(opts.atol) + Scalar(opts.rtol) * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array());
      const double err_norm = static_cast<double>((err.cwiseAbs().array() / scale).maxCoeff());

      if (err_norm <= 1.0) {
        t = last ? target : t + step;
        y.swap(y_new);
        k1.swap(k7);
        ++stats.accepted;
        const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
        // A step clipped to the output time says nothing about the natural step size.
        h = last ? std::max(h, step * factor) : step * factor;
      } else {
        ++stats.rejected;
        h = std::isfinite(err_norm) ? step * std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.5) : 0.1 * step;
        if (h < min_step) throw OdeError("step size underflow");
      }
    }
    observe(next, static_cast<const Vec&>(y));
  }
  return stats;
}

}  // namespace bassnet
