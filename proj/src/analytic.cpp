#include "bassnet/analytic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bassnet {

HalfLifeResult half_life(const std::function<double(double)>& curve, double t_hint, double tolerance) {
  if (!(t_hint > 0.0) || !std::isfinite(t_hint)) throw std::invalid_argument("half_life: t_hint must be positive");
  double lo = 0.0;
  double hi = t_hint;
  int iterations = 0;
  double f_hi = curve(hi);
  for (int doubling = 0; f_hi < 0.5; ++doubling) {
    if (doubling >= 200 || !std::isfinite(hi)) {
      throw std::runtime_error("half_life: curve does not reach 1/2 within 200 doublings");
    }
    lo = hi;
    hi *= 2.0;
    f_hi = curve(hi);
    ++iterations;
  }
  if (std::abs(f_hi - 0.5) <= tolerance) return {hi, f_hi - 0.5, iterations};

  double mid = hi;
  double f_mid = f_hi;
  // Bisect until the residual meets tolerance or the bracket collapses to 1 ulp.
  while (true) {
    mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    f_mid = curve(mid);
    ++iterations;
    if (std::abs(f_mid - 0.5) <= tolerance) break;
    if (f_mid < 0.5) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {mid, f_mid - 0.5, iterations};
}

double half_life_ratio_asymptotic(double lambda) {
  if (!(lambda > 1.0)) throw std::domain_error("half_life_ratio_asymptotic requires lambda > 1");
  return (2.0 / std::numbers::ln2) * std::log(lambda) / lambda;
}

double bass_half_life(const BassParams& bp) { return std::log(2.0 + bp.q / bp.p) / (bp.p + bp.q); }

}  // namespace bassnet
