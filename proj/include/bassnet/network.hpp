#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bassnet {

using NodeId = int;

/// Incoming edge: node `source` adds `weight` to the target's hazard once it adopts.
struct InEdge {
  NodeId source;
  double weight;

  friend bool operator==(const InEdge&, const InEdge&) = default;
};

/// Directed weighted edge in source-first order, as stored on disk.
struct Edge {
  NodeId source;
  NodeId target;
  double weight;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted directed influence network with per-node external rates.
///
/// Edges are stored by target. Instances are immutable once built; use
/// NetworkBuilder to assemble one.
class NetworkSpec {
 public:
  NetworkSpec() = default;

  /// Takes ownership of the per-target incoming lists. Each list is sorted by
  /// source; duplicates and non-positive weights must already be excluded (see
  /// NetworkBuilder) but are not re-checked here, so validate() can report them.
  NetworkSpec(Eigen::VectorXd external_rates, std::vector<std::vector<InEdge>> incoming,
              std::string metadata = {});

  int node_count() const noexcept { return static_cast<int>(external_rates_.size()); }
  const Eigen::VectorXd& external_rates() const noexcept { return external_rates_; }
  double external_rate(NodeId j) const { return external_rates_(j); }
  const std::vector<InEdge>& incoming(NodeId j) const { return incoming_.at(static_cast<std::size_t>(j)); }
  const std::string& metadata() const noexcept { return metadata_; }
  std::size_t edge_count() const noexcept;

  /// Edges in (source, target) lexicographic order.
  std::vector<Edge> edges() const;
  /// Outgoing adjacency (target, weight) per source, in target order.
  std::vector<std::vector<InEdge>> outgoing() const;
  /// Dense M x M matrix with entry (k, j) = q_{k,j}.
  Eigen::MatrixXd influence_matrix() const;
  /// Vector of in-weights q_j.
  Eigen::VectorXd in_weights() const;

  NetworkSpec with_metadata(std::string metadata) const;

  friend bool operator==(const NetworkSpec& a, const NetworkSpec& b);

 private:
  Eigen::VectorXd external_rates_;
  std::vector<std::vector<InEdge>> incoming_;
  std::string metadata_;
};

/// Accumulates edges. Repeated (source, target) pairs are merged by summing
/// weights unless `reject_duplicates` is set.
class NetworkBuilder {
 public:
  explicit NetworkBuilder(int node_count, double external_rate = 0.0);
  NetworkBuilder(Eigen::VectorXd external_rates);

  NetworkBuilder& set_external_rate(NodeId j, double p);
  NetworkBuilder& add_edge(NodeId source, NodeId target, double weight);
  NetworkBuilder& reject_duplicates(bool on = true) {
    reject_duplicates_ = on;
    return *this;
  }
  NetworkSpec build(std::string metadata = {}) const;

 private:
  Eigen::VectorXd rates_;
  std::vector<std::vector<InEdge>> incoming_;
  bool reject_duplicates_ = false;
};

enum class ViolationKind { SelfLoop, NonPositiveWeight, NonPositiveExternalRate, ZeroInWeight, InvalidNode, DuplicateEdge };

struct Violation {
  ViolationKind kind;
  NodeId node;         // target node (or the node the check concerns)
  NodeId source = -1;  // edge source, when the violation concerns an edge
  std::string message;
};

/// Checks the model assumptions. An empty result means the network is valid.
std::vector<Violation> validate(const NetworkSpec& net, bool allow_isolated = false);

/// Total incoming weight q_j of node j.
double in_weight(const NetworkSpec& net, NodeId j);

struct HomogeneityCheck {
  bool is_p_homogeneous;
  bool is_q_homogeneous;
  double p_min, p_max;
  double q_min, q_max;
  double tolerance;
};

HomogeneityCheck check_homogeneity(const NetworkSpec& net, double tolerance = 1e-12);

/// Same edge pattern, p_j = p everywhere, incoming weights rescaled by q / q_j.
NetworkSpec homogenize(const NetworkSpec& net, double p, double q);

// Generators. All return networks with p_j = p and q_j = q.

enum class CircleSides { One, Two };

NetworkSpec make_complete(int node_count, double p, double q);
NetworkSpec make_circle(int node_count, double p, double q, CircleSides sides = CircleSides::Two);
NetworkSpec make_grid(int dimension, int side, double p, double q);
NetworkSpec make_pairs(int node_count, double p, double q);
/// Undirected path 0-1-...-(M-1), incoming weights q / degree.
NetworkSpec make_path(int node_count, double p, double q);
NetworkSpec make_star(int node_count, double p, double q);
NetworkSpec make_erdos_renyi(int node_count, double mean_degree, double p, double q, std::uint64_t seed);
NetworkSpec make_scale_free(int node_count, int attach, double p, double q, std::uint64_t seed);
NetworkSpec make_small_world(int node_count, int neighbors, double rewire_prob, double p, double q,
                             std::uint64_t seed);

/// Builds a network from an undirected skeleton: each edge {a, b} becomes two
/// directed edges and every node's incoming weights are q / degree.
NetworkSpec from_undirected(int node_count, const std::vector<std::pair<NodeId, NodeId>>& skeleton, double p,
                            double q, std::string metadata);

struct FamilyParams {
  std::string family;  // complete|circle|grid|pairs|path|star|erdos_renyi|scale_free|small_world
  int node_count = 0;
  double p = 0.01;
  double q = 0.1;
  CircleSides sides = CircleSides::Two;
  int dimension = 2;
  int side = 0;
  double mean_degree = 4.0;
  int attach = 2;
  int neighbors = 4;
  double rewire_prob = 0.1;
};

/// Dispatches to the named generator. Throws std::invalid_argument on unknown
/// families or bad parameters.
NetworkSpec generate(const FamilyParams& params, std::uint64_t seed);

}  // namespace bassnet
