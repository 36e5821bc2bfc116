#include "bassnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "bassnet/rng.hpp"

namespace bassnet {

namespace {

std::string describe(const char* family, std::initializer_list<std::pair<const char*, double>> params) {
  std::ostringstream os;
  os.precision(17);
  os << family << '(';
  bool first = true;
  for (const auto& [name, value] : params) {
    os << (first ? "" : ", ") << name << '=' << value;
    first = false;
  }
  os << ')';
  return os.str();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_rates(double p, double q) {
  require(std::isfinite(p) && p > 0.0, "p must be positive");
  require(std::isfinite(q) && q > 0.0, "q must be positive");
}

}  // namespace

NetworkSpec::NetworkSpec(Eigen::VectorXd external_rates, std::vector<std::vector<InEdge>> incoming,
                         std::string metadata)
    : external_rates_(std::move(external_rates)), incoming_(std::move(incoming)), metadata_(std::move(metadata)) {
  if (static_cast<std::size_t>(external_rates_.size()) != incoming_.size()) {
    throw std::invalid_argument("external rate count does not match node count");
  }
}

std::size_t NetworkSpec::edge_count() const noexcept {
  std::size_t n = 0;
  for (const auto& in : incoming_) n += in.size();
  return n;
}

std::vector<Edge> NetworkSpec::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId j = 0; j < node_count(); ++j) {
    for (const auto& e : incoming_[j]) out.push_back({e.source, j, e.weight});
  }
  std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.source, a.target) < std::pair(b.source, b.target);
  });
  return out;
}

std::vector<std::vector<InEdge>> NetworkSpec::outgoing() const {
  std::vector<std::vector<InEdge>> out(incoming_.size());
  for (NodeId j = 0; j < node_count(); ++j) {
    for (const auto& e : incoming_[j]) out[e.source].push_back({j, e.weight});
  }
  return out;
}

Eigen::MatrixXd NetworkSpec::influence_matrix() const {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(node_count(), node_count());
  for (NodeId j = 0; j < node_count(); ++j) {
    for (const auto& e : incoming_[j]) q(e.source, j) += e.weight;
  }
  return q;
}

Eigen::VectorXd NetworkSpec::in_weights() const {
  Eigen::VectorXd w(node_count());
  for (NodeId j = 0; j < node_count(); ++j) w(j) = in_weight(*this, j);
  return w;
}

NetworkSpec NetworkSpec::with_metadata(std::string metadata) const {
  NetworkSpec copy = *this;
  copy.metadata_ = std::move(metadata);
  return copy;
}

bool operator==(const NetworkSpec& a, const NetworkSpec& b) {
  return a.external_rates_.size() == b.external_rates_.size() && a.external_rates_ == b.external_rates_ &&
         a.incoming_ == b.incoming_ && a.metadata_ == b.metadata_;
}

NetworkBuilder::NetworkBuilder(int node_count, double external_rate)
    : rates_(Eigen::VectorXd::Constant(node_count, external_rate)),
      incoming_(static_cast<std::size_t>(node_count)) {
  require(node_count >= 1, "node count must be positive");
}

NetworkBuilder::NetworkBuilder(Eigen::VectorXd external_rates)
    : rates_(std::move(external_rates)), incoming_(static_cast<std::size_t>(rates_.size())) {
  require(rates_.size() >= 1, "node count must be positive");
}

NetworkBuilder& NetworkBuilder::set_external_rate(NodeId j, double p) {
  require(j >= 0 && j < rates_.size(), "node id out of range");
  rates_(j) = p;
  return *this;
}

NetworkBuilder& NetworkBuilder::add_edge(NodeId source, NodeId target, double weight) {
  const auto m = static_cast<NodeId>(rates_.size());
  if (source < 0 || source >= m || target < 0 || target >= m) {
    std::ostringstream os;
    os << "edge (" << source << ", " << target << ") references a node outside [0, " << m << ")";
    throw std::invalid_argument(os.str());
  }
  incoming_[target].push_back({source, weight});
  return *this;
}

NetworkSpec NetworkBuilder::build(std::string metadata) const {
  auto incoming = incoming_;
  for (std::size_t j = 0; j < incoming.size(); ++j) {
    auto& in = incoming[j];
    std::stable_sort(in.begin(), in.end(), [](const InEdge& a, const InEdge& b) { return a.source < b.source; });
    std::vector<InEdge> merged;
    merged.reserve(in.size());
    for (const auto& e : in) {
      if (!merged.empty() && merged.back().source == e.source) {
        if (reject_duplicates_) {
          std::ostringstream os;
          os << "duplicate edge (" << e.source << ", " << j << ")";
          throw std::invalid_argument(os.str());
        }
        merged.back().weight += e.weight;
      } else {
        merged.push_back(e);
      }
    }
    in = std::move(merged);
  }
  return NetworkSpec(rates_, std::move(incoming), std::move(metadata));
}

std::vector<Violation> validate(const NetworkSpec& net, bool allow_isolated) {
  std::vector<Violation> out;
  for (NodeId j = 0; j < net.node_count(); ++j) {
    const double p = net.external_rate(j);
    if (!(std::isfinite(p) && p > 0.0)) {
      out.push_back({ViolationKind::NonPositiveExternalRate, j, -1, "p_j <= 0 at node " + std::to_string(j)});
    }
    double in = 0.0;
    NodeId previous = -1;
    for (const auto& e : net.incoming(j)) {
      if (e.source < 0 || e.source >= net.node_count()) {
        out.push_back({ViolationKind::InvalidNode, j, e.source, "edge source out of range at node " + std::to_string(j)});
        continue;
      }
      if (e.source == previous) {
        out.push_back({ViolationKind::DuplicateEdge, j, e.source,
                       "duplicate edge (" + std::to_string(e.source) + ", " + std::to_string(j) + ")"});
      }
      previous = e.source;
      if (e.source == j) {
        out.push_back({ViolationKind::SelfLoop, j, j, "self-loop at node " + std::to_string(j)});
      }
      if (!(std::isfinite(e.weight) && e.weight > 0.0)) {
        out.push_back({ViolationKind::NonPositiveWeight, j, e.source,
                       "non-positive weight on edge (" + std::to_string(e.source) + ", " + std::to_string(j) + ")"});
      } else if (e.source != j) {
        in += e.weight;
      }
    }
    if (!allow_isolated && !(in > 0.0)) {
      out.push_back({ViolationKind::ZeroInWeight, j, -1, "q_j = 0 at node " + std::to_string(j)});
    }
  }
  return out;
}

double in_weight(const NetworkSpec& net, NodeId j) {
  if (j < 0 || j >= net.node_count()) throw std::out_of_range("invalid node id " + std::to_string(j));
  double sum = 0.0;
  for (const auto& e : net.incoming(j)) sum += e.weight;
  return sum;
}

HomogeneityCheck check_homogeneity(const NetworkSpec& net, double tolerance) {
  const Eigen::VectorXd& p = net.external_rates();
  const Eigen::VectorXd q = net.in_weights();
  HomogeneityCheck h{};
  h.p_min = p.minCoeff();
  h.p_max = p.maxCoeff();
  h.q_min = q.minCoeff();
  h.q_max = q.maxCoeff();
  h.tolerance = tolerance;
  h.is_p_homogeneous = (h.p_max - h.p_min) <= tolerance;
  h.is_q_homogeneous = (h.q_max - h.q_min) <= tolerance;
  return h;
}

NetworkSpec homogenize(const NetworkSpec& net, double p, double q) {
  require_rates(p, q);
  std::vector<std::vector<InEdge>> incoming(static_cast<std::size_t>(net.node_count()));
  for (NodeId j = 0; j < net.node_count(); ++j) {
    const double qj = in_weight(net, j);
    if (!(qj > 0.0)) throw std::invalid_argument("cannot homogenize: q_j = 0 at node " + std::to_string(j));
    const double scale = q / qj;
    incoming[j] = net.incoming(j);
    for (auto& e : incoming[j]) e.weight *= scale;
  }
  return NetworkSpec(Eigen::VectorXd::Constant(net.node_count(), p), std::move(incoming), net.metadata());
}

NetworkSpec make_complete(int node_count, double p, double q) {
  require(node_count >= 2, "complete network needs M >= 2");
  require_rates(p, q);
  NetworkBuilder b(node_count, p);
  const double w = q / (node_count - 1);
  for (NodeId j = 0; j < node_count; ++j) {
    for (NodeId k = 0; k < node_count; ++k) {
      if (k != j) b.add_edge(k, j, w);
    }
  }
  return b.build(describe("complete", {{"M", node_count}, {"p", p}, {"q", q}}));
}

NetworkSpec make_circle(int node_count, double p, double q, CircleSides sides) {
  require(node_count >= 2, "circle needs M >= 2");
  require_rates(p, q);
  NetworkBuilder b(node_count, p);
  for (NodeId j = 0; j < node_count; ++j) {
    const NodeId left = (j + node_count - 1) % node_count;
    if (sides == CircleSides::One) {
      b.add_edge(left, j, q);
    } else {
      b.add_edge(left, j, q / 2);
      b.add_edge((j + 1) % node_count, j, q / 2);
    }
  }
  const bool one = sides == CircleSides::One;
  return b.build(describe(one ? "circle1" : "circle2", {{"M", node_count}, {"p", p}, {"q", q}}));
}

NetworkSpec make_grid(int dimension, int side, double p, double q) {
  require(dimension >= 1, "grid dimension must be >= 1");
  require(side >= 2, "grid side must be >= 2");
  require_rates(p, q);
  long long total = 1;
  for (int d = 0; d < dimension; ++d) {
    total *= side;
    require(total <= (1 << 26), "grid too large");
  }
  const auto m = static_cast<int>(total);
  NetworkBuilder b(m, p);
  const double w = q / (2.0 * dimension);
  for (NodeId j = 0; j < m; ++j) {
    int stride = 1;
    for (int d = 0; d < dimension; ++d) {
      const int coord = (j / stride) % side;
      const NodeId up = j + (((coord + 1) % side) - coord) * stride;
      const NodeId down = j + (((coord + side - 1) % side) - coord) * stride;
      b.add_edge(down, j, w);
      b.add_edge(up, j, w);
      stride *= side;
    }
  }
  return b.build(describe("grid", {{"D", dimension}, {"side", side}, {"p", p}, {"q", q}}));
}

NetworkSpec make_pairs(int node_count, double p, double q) {
  require(node_count >= 2 && node_count % 2 == 0, "M must be even");
  require_rates(p, q);
  NetworkBuilder b(node_count, p);
  for (NodeId j = 0; j < node_count; j += 2) {
    b.add_edge(j, j + 1, q);
    b.add_edge(j + 1, j, q);
  }
  return b.build(describe("pairs", {{"M", node_count}, {"p", p}, {"q", q}}));
}

NetworkSpec from_undirected(int node_count, const std::vector<std::pair<NodeId, NodeId>>& skeleton, double p,
                            double q, std::string metadata) {
  std::vector<std::set<NodeId>> neighbors(static_cast<std::size_t>(node_count));
  for (auto [a, b] : skeleton) {
    require(a >= 0 && a < node_count && b >= 0 && b < node_count, "skeleton edge out of range");
    if (a == b) continue;
    neighbors[a].insert(b);
    neighbors[b].insert(a);
  }
  std::vector<std::vector<InEdge>> incoming(static_cast<std::size_t>(node_count));
  for (NodeId j = 0; j < node_count; ++j) {
    const double w = neighbors[j].empty() ? 0.0 : q / static_cast<double>(neighbors[j].size());
    for (NodeId k : neighbors[j]) incoming[j].push_back({k, w});
  }
  return NetworkSpec(Eigen::VectorXd::Constant(node_count, p), std::move(incoming), std::move(metadata));
}

NetworkSpec make_path(int node_count, double p, double q) {
  require(node_count >= 2, "path needs M >= 2");
  require_rates(p, q);
  std::vector<std::pair<NodeId, NodeId>> skeleton;
  for (NodeId j = 0; j + 1 < node_count; ++j) skeleton.emplace_back(j, j + 1);
  return from_undirected(node_count, skeleton, p, q, describe("path", {{"M", node_count}, {"p", p}, {"q", q}}));
}

NetworkSpec make_star(int node_count, double p, double q) {
  require(node_count >= 2, "star needs M >= 2");
  require_rates(p, q);
  std::vector<std::pair<NodeId, NodeId>> skeleton;
  for (NodeId j = 1; j < node_count; ++j) skeleton.emplace_back(0, j);
  return from_undirected(node_count, skeleton, p, q, describe("star", {{"M", node_count}, {"p", p}, {"q", q}}));
}

NetworkSpec make_erdos_renyi(int node_count, double mean_degree, double p, double q, std::uint64_t seed) {
  require(node_count >= 2, "erdos_renyi needs M >= 2");
  require(mean_degree > 0.0 && mean_degree <= node_count, "mean degree must lie in (0, M]");
  require_rates(p, q);
  const double prob = mean_degree / node_count;
  Philox rng(seed);
  std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(node_count));
  std::vector<std::pair<NodeId, NodeId>> skeleton;
  for (NodeId a = 0; a < node_count; ++a) {
    for (NodeId b = a + 1; b < node_count; ++b) {
      if (uniform01(rng) < prob) {
        skeleton.emplace_back(a, b);
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
    }
  }
  // Isolated nodes get their potential edges redrawn.
  for (NodeId a = 0; a < node_count; ++a) {
    for (int attempt = 0; attempt < 100 && adj[a].empty(); ++attempt) {
      for (NodeId b = 0; b < node_count; ++b) {
        if (b != a && uniform01(rng) < prob) {
          skeleton.emplace_back(a, b);
          adj[a].push_back(b);
          adj[b].push_back(a);
        }
      }
    }
    if (adj[a].empty()) {
      throw std::runtime_error("erdos_renyi: node " + std::to_string(a) + " still isolated after 100 redraws");
    }
  }
  return from_undirected(node_count, skeleton, p, q,
                         describe("erdos_renyi", {{"M", node_count}, {"lambda", mean_degree}, {"p", p}, {"q", q},
                                                  {"seed", static_cast<double>(seed)}}));
}

NetworkSpec make_scale_free(int node_count, int attach, double p, double q, std::uint64_t seed) {
  require(attach >= 1, "attachment count must be >= 1");
  require(node_count > attach, "scale_free needs M > m_attach");
  require_rates(p, q);
  Philox rng(seed);
  std::vector<std::pair<NodeId, NodeId>> skeleton;
  // Each node appears once per incident edge end.
  std::vector<NodeId> ends;
  for (NodeId a = 0; a <= attach; ++a) {
    for (NodeId b = a + 1; b <= attach; ++b) {
      skeleton.emplace_back(a, b);
      ends.push_back(a);
      ends.push_back(b);
    }
  }
  for (NodeId v = attach + 1; v < node_count; ++v) {
    std::vector<NodeId> targets;
    while (static_cast<int>(targets.size()) < attach) {
      const NodeId t = ends[uniform_index(rng, ends.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (NodeId t : targets) {
      skeleton.emplace_back(v, t);
      ends.push_back(v);
      ends.push_back(t);
    }
  }
  return from_undirected(node_count, skeleton, p, q,
                         describe("scale_free", {{"M", node_count}, {"m", attach}, {"p", p}, {"q", q},
                                                 {"seed", static_cast<double>(seed)}}));
}

NetworkSpec make_small_world(int node_count, int neighbors, double rewire_prob, double p, double q,
                             std::uint64_t seed) {
  require(neighbors >= 2 && neighbors % 2 == 0, "small_world needs an even neighbor count k >= 2");
  require(node_count > neighbors, "small_world needs M > k");
  require(rewire_prob >= 0.0 && rewire_prob <= 1.0, "rewire probability must lie in [0, 1]");
  require_rates(p, q);
  Philox rng(seed);
  std::vector<std::set<NodeId>> adj(static_cast<std::size_t>(node_count));
  for (NodeId i = 0; i < node_count; ++i) {
    for (int d = 1; d <= neighbors / 2; ++d) {
      const NodeId j = (i + d) % node_count;
      adj[i].insert(j);
      adj[j].insert(i);
    }
  }
  for (int d = 1; d <= neighbors / 2; ++d) {
    for (NodeId i = 0; i < node_count; ++i) {
      const NodeId j = (i + d) % node_count;
      if (!adj[i].contains(j) || uniform01(rng) >= rewire_prob) continue;
      if (static_cast<int>(adj[i].size()) >= node_count - 1) continue;
      NodeId w;
      do {
        w = static_cast<NodeId>(uniform_index(rng, static_cast<std::uint64_t>(node_count)));
      } while (w == i || adj[i].contains(w));
      adj[i].erase(j);
      adj[j].erase(i);
      adj[i].insert(w);
      adj[w].insert(i);
    }
  }
  std::vector<std::pair<NodeId, NodeId>> skeleton;
  for (NodeId i = 0; i < node_count; ++i) {
    for (NodeId j : adj[i]) {
      if (i < j) skeleton.emplace_back(i, j);
    }
  }
  return from_undirected(node_count, skeleton, p, q,
                         describe("small_world", {{"M", node_count}, {"k", neighbors}, {"beta", rewire_prob},
                                                  {"p", p}, {"q", q}, {"seed", static_cast<double>(seed)}}));
}

NetworkSpec generate(const FamilyParams& f, std::uint64_t seed) {
  if (f.family == "complete") return make_complete(f.node_count, f.p, f.q);
  if (f.family == "circle") return make_circle(f.node_count, f.p, f.q, f.sides);
  if (f.family == "grid") return make_grid(f.dimension, f.side, f.p, f.q);
  if (f.family == "pairs") return make_pairs(f.node_count, f.p, f.q);
  if (f.family == "path") return make_path(f.node_count, f.p, f.q);
  if (f.family == "star") return make_star(f.node_count, f.p, f.q);
  if (f.family == "erdos_renyi") return make_erdos_renyi(f.node_count, f.mean_degree, f.p, f.q, seed);
  if (f.family == "scale_free") return make_scale_free(f.node_count, f.attach, f.p, f.q, seed);
  if (f.family == "small_world") return make_small_world(f.node_count, f.neighbors, f.rewire_prob, f.p, f.q, seed);
  throw std::invalid_argument("unknown network family '" + f.family + "'");
}

}  // namespace bassnet
