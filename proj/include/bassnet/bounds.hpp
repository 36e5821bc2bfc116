#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bassnet/analytic.hpp"
#include "bassnet/curve.hpp"
#include "bassnet/network.hpp"

namespace bassnet {

inline constexpr double kExactSlack = 1e-9;
inline constexpr double kStdErrorMultiplier = 3.0;

/// Pointwise comparison of an observed curve against the two-node lower bound
/// and the Bass upper bound.
///
/// A point is flagged when its margin falls below -slack, where slack is
/// kExactSlack for exact/formula curves and kStdErrorMultiplier * se for Monte
/// Carlo curves, floored at 1/(M R) so that saturated ensembles (se = 0) are
/// not flagged for sub-resolution differences. Per-node curves, when present, are checked with the exact
/// slack (Monte Carlo per-node curves are not checked).
struct BoundsReport {
  Eigen::VectorXd times;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd observed;
  Eigen::VectorXd margin_low;   // observed - lower
  Eigen::VectorXd margin_high;  // upper - observed
  Eigen::VectorXd slack;
  std::vector<bool> violation_low;
  std::vector<bool> violation_high;

  BassParams lower_params{1.0, 0.0};
  BassParams upper_params{1.0, 0.0};
  CurveSource source = CurveSource::Exact;
  double worst_margin_low = 0.0;
  double worst_margin_high = 0.0;
  /// Worst per-node margins (NaN when no per-node curves were checked).
  double worst_node_margin_low = 0.0;
  double worst_node_margin_high = 0.0;
  long node_violations = 0;
  long violations = 0;  // grid points with either flag set

  bool ok() const noexcept { return violations == 0 && node_violations == 0; }
  double violation_fraction() const noexcept {
    return times.size() == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(times.size());
  }
};

/// Checks a curve from a network homogeneous in (p, q). Throws
/// std::invalid_argument when the curve records different parameters.
BoundsReport verify_bounds(const AdoptionCurve& curve, const BassParams& params);

/// Bounds for networks with heterogeneous rates: the lower curve uses the
/// smallest p_j and q_j, the upper curve the largest.
BoundsReport verify_bounds_inhomogeneous(const AdoptionCurve& curve, const NetworkSpec& net);

/// Checks a curve against arbitrary lower/upper parameter pairs.
BoundsReport verify_bounds_between(const AdoptionCurve& curve, const BassParams& lower, const BassParams& upper);

/// (f - f_two_node, f_bass - f) at a grid time of an exact curve. Throws
/// std::out_of_range when `t_probe` is not on the grid.
std::pair<double, double> strictness_margin(const AdoptionCurve& curve, const BassParams& params, double t_probe);

struct GapMetrics {
  double lambda;
  double t_half_lower;  // two-node curve
  double t_half_upper;  // Bass curve
  double ratio;         // t_half_upper / t_half_lower
  std::optional<double> asymptotic;
  std::optional<double> relative_deviation;  // |ratio - asymptotic| / asymptotic
};

GapMetrics gap_metrics(const BassParams& params);

struct ConjectureSample {
  std::uint64_t seed;
  std::size_t edge_count;
  double max_excess;  // max over grid of f(t) - f_complete(t)
  double time_of_max;
};

struct ConjectureResult {
  int node_count;
  BassParams params{1.0, 0.0};
  Eigen::VectorXd times;
  Eigen::VectorXd complete;  // f_complete on the grid
  std::vector<ConjectureSample> samples;
  double max_excess = 0.0;
  /// Samples whose excess exceeds kExactSlack. These are candidates only.
  std::vector<std::size_t> candidates;
};

/// max over the grid of f(t; net) - f_complete(t; M), with the time attaining it.
std::pair<double, double> conjecture_excess(const NetworkSpec& net, const BassParams& params,
                                            std::span<const double> times);

/// Random connected homogeneous networks on `node_count` nodes compared with
/// the complete network of the same size. Skeletons are Erdos-Renyi graphs with
/// edge probability 1/2 conditioned on connectivity; each direction of every
/// skeleton edge gets an independent weight in [0.1, 1), then the network is
/// homogenized to (p, q).
ConjectureResult conjecture_experiment(int node_count, const BassParams& params, int sample_count, std::uint64_t seed,
                                       std::span<const double> times, unsigned threads = 0);

/// Random connected homogeneous network used by conjecture_experiment.
NetworkSpec random_connected_homogeneous(int node_count, const BassParams& params, std::uint64_t seed);

}  // namespace bassnet
