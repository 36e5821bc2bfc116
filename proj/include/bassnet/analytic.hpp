#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

namespace bassnet {

/// External (p) and internal (q) adoption rates, both in 1/time.
struct BassParams {
  double p;
  double q;

  BassParams(double p_, double q_) : p(p_), q(q_) {
    if (!(p > 0.0) || !(q >= 0.0) || !std::isfinite(p) || !std::isfinite(q)) {
      throw std::invalid_argument("BassParams requires p > 0 and q >= 0");
    }
  }
  double lambda() const noexcept { return q / p; }

  friend bool operator==(const BassParams&, const BassParams&) = default;
};

namespace detail {

template <typename Scalar>
Scalar clamp_fraction(Scalar f) {
  return std::clamp(f, Scalar(0), Scalar(1));
}

template <typename Scalar>
void require_nonnegative_time(Scalar t) {
  if (!(t >= Scalar(0))) throw std::domain_error("time must be non-negative");
}

}  // namespace detail

/// Compartmental Bass curve (1 - e^{-(p+q)t}) / (1 + (q/p) e^{-(p+q)t}).
template <std::floating_point Scalar>
Scalar f_bass(Scalar t, const BassParams& bp) {
  detail::require_nonnegative_time(t);
  const Scalar p(bp.p), q(bp.q);
  const Scalar decay = std::exp(-(p + q) * t);
  return detail::clamp_fraction((-std::expm1(-(p + q) * t)) / (Scalar(1) + (q / p) * decay));
}

/// |p - q| at or below this fraction of max(p, q) switches to the p = q limit.
inline constexpr double kTwoNodeLimitThreshold = 1e-8;

/// Adoption level of the homogeneous two-node network.
template <std::floating_point Scalar>
Scalar f_two_node(Scalar t, const BassParams& bp) {
  detail::require_nonnegative_time(t);
  const Scalar p(bp.p), q(bp.q);
  if (std::abs(bp.p - bp.q) <= kTwoNodeLimitThreshold * std::max(bp.p, bp.q)) {
    return detail::clamp_fraction(Scalar(1) - std::exp(-Scalar(2) * p * t) * (Scalar(1) + p * t));
  }
  // e^{-pt}(q e^{-pt} - p e^{-qt})/(q - p) rewritten with m = min(p, q), d = |q - p| as
  // e^{-(p+m)t}(1 + m (1 - e^{-dt})/d), which neither cancels near p = q nor overflows.
  const Scalar m = std::min(p, q);
  const Scalar d = std::abs(q - p);
  const Scalar survivor = std::exp(-(p + m) * t) * (Scalar(1) + m * (-std::expm1(-d * t)) / d);
  return detail::clamp_fraction(Scalar(1) - survivor);
}

/// Adoption level on the infinite one-sided or two-sided circle.
template <std::floating_point Scalar>
Scalar f_one_d(Scalar t, const BassParams& bp) {
  detail::require_nonnegative_time(t);
  const Scalar p(bp.p), q(bp.q);
  // q (1 - e^{-pt}) / p
  const Scalar growth = q * (-std::expm1(-p * t)) / p;
  return detail::clamp_fraction(-std::expm1(-(p + q) * t + growth));
}

/// (lower, upper) = (1 - e^{-pt}, 1 - e^{-(p+q)t}).
template <std::floating_point Scalar>
std::pair<Scalar, Scalar> trivial_bounds(Scalar t, const BassParams& bp) {
  detail::require_nonnegative_time(t);
  const Scalar p(bp.p), q(bp.q);
  return {detail::clamp_fraction(-std::expm1(-p * t)), detail::clamp_fraction(-std::expm1(-(p + q) * t))};
}

/// Element-wise evaluation over a time grid.
template <typename Derived, typename Fn>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> evaluate_on(const Eigen::DenseBase<Derived>& times, Fn&& fn) {
  Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> out(times.size());
  for (Eigen::Index i = 0; i < times.size(); ++i) out(i) = fn(times(i));
  return out;
}

template <typename Derived>
auto f_bass(const Eigen::DenseBase<Derived>& times, const BassParams& bp) {
  return evaluate_on(times, [&](auto t) { return f_bass(t, bp); });
}

template <typename Derived>
auto f_two_node(const Eigen::DenseBase<Derived>& times, const BassParams& bp) {
  return evaluate_on(times, [&](auto t) { return f_two_node(t, bp); });
}

template <typename Derived>
auto f_one_d(const Eigen::DenseBase<Derived>& times, const BassParams& bp) {
  return evaluate_on(times, [&](auto t) { return f_one_d(t, bp); });
}

struct HalfLifeResult {
  double t_half;
  double residual;  // f(t_half) - 1/2
  int iterations;
};

/// Time at which a non-decreasing curve with f(0) = 0 first reaches 1/2.
///
/// The bracket starts at [0, t_hint] and doubles its upper end until the curve
/// exceeds 1/2 (at most 200 doublings), then bisects to |f(T) - 1/2| <= tol.
/// Throws std::runtime_error if the curve never reaches 1/2.
HalfLifeResult half_life(const std::function<double(double)>& curve, double t_hint, double tolerance = 1e-10);

/// Large-lambda estimate (2 / log 2) (log lambda) / lambda of the ratio of
/// half-lives of the Bass curve and the two-node curve. Requires lambda > 1.
double half_life_ratio_asymptotic(double lambda);

/// Closed-form half-life of the Bass curve, log(2 + q/p) / (p + q).
double bass_half_life(const BassParams& bp);

}  // namespace bassnet
