#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bassnet/analytic.hpp"

namespace bassnet {

enum class CurveSource { Exact, MonteCarlo, Formula };

std::string to_string(CurveSource source);
CurveSource curve_source_from_string(const std::string& name);

/// Adoption curve sampled on a time grid.
///
/// `node` is G x M (one column per node) when per-node probabilities are
/// available and empty otherwise. `std_error` is empty for exact and formula
/// curves.
struct AdoptionCurve {
  Eigen::VectorXd times;
  Eigen::VectorXd mean;
  Eigen::VectorXd std_error;
  Eigen::MatrixXd node;
  CurveSource source = CurveSource::Exact;
  int node_count = 0;
  std::optional<BassParams> params;  // set when the generating network is homogeneous
  std::uint64_t seed = 0;
  long runs = 0;

  Eigen::Index size() const noexcept { return times.size(); }
  bool has_std_error() const noexcept { return std_error.size() == times.size() && times.size() > 0; }
  bool has_nodes() const noexcept { return node.rows() == times.size() && node.cols() > 0; }
};

/// Solution of the full-state master equation.
struct ExactCurve {
  AdoptionCurve curve;
  /// Requested node pairs (i, j) and their joint nonadoption probability per grid time.
  std::vector<std::pair<int, int>> pairs;
  std::vector<Eigen::VectorXd> pair_nonadoption;
  /// max |sum_S P_S - 1| over the grid.
  double max_mass_error = 0.0;
};

/// Alias used for Monte Carlo output; `std_error` is always populated.
using EnsembleEstimate = AdoptionCurve;

/// Uniform grid of `points` times on [0, t_max] (points >= 2).
Eigen::VectorXd uniform_grid(double t_max, int points);

}  // namespace bassnet
