#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bassnet/curve.hpp"
#include "bassnet/network.hpp"

namespace bassnet {

/// Adoption times of one realization. Nodes that had not adopted by t_max
/// hold +infinity.
struct TrajectoryRecord {
  std::uint64_t seed = 0;
  double t_max = 0.0;
  std::vector<double> adoption_times;

  static constexpr double kCensored = std::numeric_limits<double>::infinity();
  bool censored(NodeId j) const { return adoption_times.at(static_cast<std::size_t>(j)) == kCensored; }
  int adopted_by(double t) const;
};

/// Event-driven exact simulator of the adoption process on a fixed network.
///
/// Holds the outgoing adjacency so repeated runs do not rebuild it. Safe to use
/// concurrently from several threads.
class Simulator {
 public:
  explicit Simulator(const NetworkSpec& net);

  /// One realization on [0, t_max], fully determined by `seed`.
  TrajectoryRecord run(double t_max, std::uint64_t seed) const;

  int node_count() const noexcept { return static_cast<int>(p_.size()); }

 private:
  std::vector<double> p_;
  std::vector<std::vector<InEdge>> outgoing_;
};

/// Convenience wrapper around Simulator::run.
TrajectoryRecord simulate_trajectory(const NetworkSpec& net, double t_max, std::uint64_t seed);

struct EnsembleOptions {
  /// Worker threads; 0 uses the hardware concurrency. Never affects the result.
  unsigned threads = 0;
  bool per_node = false;
};

/// Seed of trajectory `index` in an ensemble rooted at `base_seed`.
std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index);

/// Mean fraction adopted and its standard error over `runs` trajectories.
///
/// Trajectories are grouped in fixed-size blocks whose statistics are merged in
/// block order, so the result is bitwise independent of the thread count.
EnsembleEstimate estimate_ensemble(const NetworkSpec& net, std::span<const double> times, long runs,
                                   std::uint64_t base_seed, const EnsembleOptions& options = {});

}  // namespace bassnet
