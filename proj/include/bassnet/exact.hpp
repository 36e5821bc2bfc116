#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bassnet/analytic.hpp"
#include "bassnet/curve.hpp"
#include "bassnet/network.hpp"

namespace bassnet {

/// Largest network the full-state solver accepts (2^20 states).
inline constexpr int kMaxExactNodes = 20;

struct MasterOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  /// Node pairs whose joint nonadoption probability should be tracked.
  std::vector<std::pair<int, int>> pairs;
  bool all_pairs = false;
  /// Accept networks with q_j = 0 at some nodes.
  bool allow_isolated = false;
};

/// Invalid input to an exact solver (network too large, bad grid, invalid network).
class ExactSolverError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Probability of each adopter subset; bit j of the index is set iff node j adopted.
struct StateDistribution {
  double time = 0.0;
  Eigen::VectorXd probabilities;
};

/// Forward Kolmogorov equations over all 2^M adopter subsets, started from the
/// empty set. From subset S, nonadopter j adopts at rate
/// p_j + sum_{k in S} q_{k,j}.
///
/// The grid must start at 0 and be strictly increasing.
ExactCurve solve_master(const NetworkSpec& net, std::span<const double> times, const MasterOptions& options = {});

/// Same as solve_master but also returns the final state distribution.
ExactCurve solve_master(const NetworkSpec& net, std::span<const double> times, const MasterOptions& options,
                        StateDistribution* final_state);

/// Homogeneous complete network through its adopter-count birth chain:
/// n -> n+1 at rate (M - n)(p + q n / (M - 1)) (rate (M - n) p when M = 1).
/// The result carries only the aggregate curve; by exchangeability f_j = f.
AdoptionCurve solve_complete(int node_count, const BassParams& params, std::span<const double> times,
                             double tolerance = 1e-12);

struct PairSandwichReport {
  /// Per grid time: all pairs satisfy [S_i][S_j] <= [S_i,S_j] <= e^{-2pt} within slack.
  std::vector<bool> holds;
  /// Per grid time: min over pairs of [S_i,S_j] - [S_i][S_j].
  Eigen::VectorXd lower_margin;
  /// Per grid time: min over pairs of e^{-2pt} - [S_i,S_j].
  Eigen::VectorXd upper_margin;
  double worst_lower = 0.0;
  double worst_upper = 0.0;
  double slack = 1e-9;
  bool all_hold = true;
};

/// Checks the pair sandwich on every node pair of a network with homogeneous p_j.
PairSandwichReport pair_sandwich_check(const NetworkSpec& net, std::span<const double> times, double slack = 1e-9,
                                       bool allow_isolated = true);

}  // namespace bassnet
