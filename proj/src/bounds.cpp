#include "bassnet/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "bassnet/exact.hpp"
#include "bassnet/rng.hpp"

namespace bassnet {

namespace {

bool close(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1e-300, std::abs(a), std::abs(b)}); }

Eigen::Index grid_index(const Eigen::VectorXd& times, double t) {
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    if (std::abs(times(i) - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
  }
  throw std::out_of_range("probe time is not on the curve grid");
}

}  // namespace

BoundsReport verify_bounds(const AdoptionCurve& curve, const BassParams& params) {
  if (curve.params && !(close(curve.params->p, params.p) && close(curve.params->q, params.q))) {
    throw std::invalid_argument("curve parameters do not match the requested (p, q)");
  }
  return verify_bounds_between(curve, params, params);
}

BoundsReport verify_bounds_inhomogeneous(const AdoptionCurve& curve, const NetworkSpec& net) {
  const auto h = check_homogeneity(net);
  return verify_bounds_between(curve, BassParams(h.p_min, h.q_min), BassParams(h.p_max, h.q_max));
}

BoundsReport verify_bounds_between(const AdoptionCurve& curve, const BassParams& lower, const BassParams& upper) {
  const Eigen::Index g = curve.size();
  if (curve.mean.size() != g) throw std::invalid_argument("curve mean and time grid differ in length");
  const bool statistical = curve.source == CurveSource::MonteCarlo;
  if (statistical && !curve.has_std_error()) throw std::invalid_argument("Monte Carlo curve lacks standard errors");

  BoundsReport r;
  r.times = curve.times;
  r.observed = curve.mean;
  r.lower = f_two_node(curve.times, lower).matrix();
  r.upper = f_bass(curve.times, upper).matrix();
  r.margin_low = r.observed - r.lower;
  r.margin_high = r.upper - r.observed;
  if (statistical) {
    // An ensemble pinned at 0 or 1 has se = 0; it cannot resolve differences
    // below one adopter in one run, so the slack never drops under 1/(M R).
    const double quantum = curve.node_count > 0 && curve.runs > 0
                               ? 1.0 / (static_cast<double>(curve.node_count) * static_cast<double>(curve.runs))
                               : 0.0;
    r.slack = (kStdErrorMultiplier * curve.std_error).cwiseMax(quantum);
  } else {
    r.slack = Eigen::VectorXd::Constant(g, kExactSlack);
  }
  r.lower_params = lower;
  r.upper_params = upper;
  r.source = curve.source;
  r.violation_low.resize(static_cast<std::size_t>(g));
  r.violation_high.resize(static_cast<std::size_t>(g));
  for (Eigen::Index i = 0; i < g; ++i) {
    const auto k = static_cast<std::size_t>(i);
    r.violation_low[k] = r.margin_low(i) < -r.slack(i);
    r.violation_high[k] = r.margin_high(i) < -r.slack(i);
    if (r.violation_low[k] || r.violation_high[k]) ++r.violations;
  }
  r.worst_margin_low = g > 0 ? r.margin_low.minCoeff() : 0.0;
  r.worst_margin_high = g > 0 ? r.margin_high.minCoeff() : 0.0;

  if (curve.has_nodes() && !statistical) {
    const Eigen::MatrixXd low = curve.node.colwise() - r.lower;
    const Eigen::MatrixXd high = (-curve.node).colwise() + r.upper;
    r.worst_node_margin_low = low.minCoeff();
    r.worst_node_margin_high = high.minCoeff();
    r.node_violations = (low.array() < -kExactSlack).count() + (high.array() < -kExactSlack).count();
  } else {
    r.worst_node_margin_low = std::numeric_limits<double>::quiet_NaN();
    r.worst_node_margin_high = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

std::pair<double, double> strictness_margin(const AdoptionCurve& curve, const BassParams& params, double t_probe) {
  const Eigen::Index i = grid_index(curve.times, t_probe);
  const double t = curve.times(i);
  const double f = curve.mean(i);
  return {f - f_two_node(t, params), f_bass(t, params) - f};
}

GapMetrics gap_metrics(const BassParams& params) {
  if (!(params.q > 0.0)) throw std::invalid_argument("gap_metrics requires q > 0");
  const double hint = 1.0 / (params.p + params.q);
  const auto lower = half_life([&](double t) { return f_two_node(t, params); }, hint);
  const auto upper = half_life([&](double t) { return f_bass(t, params); }, hint);
  GapMetrics g;
  g.lambda = params.lambda();
  g.t_half_lower = lower.t_half;
  g.t_half_upper = upper.t_half;
  g.ratio = upper.t_half / lower.t_half;
  if (g.lambda > 1.0) {
    g.asymptotic = half_life_ratio_asymptotic(g.lambda);
    g.relative_deviation = std::abs(g.ratio - *g.asymptotic) / *g.asymptotic;
  }
  return g;
}

std::pair<double, double> conjecture_excess(const NetworkSpec& net, const BassParams& params,
                                            std::span<const double> times) {
  const ExactCurve exact = solve_master(net, times);
  const AdoptionCurve complete = solve_complete(net.node_count(), params, times);
  const Eigen::VectorXd excess = exact.curve.mean - complete.mean;
  Eigen::Index arg = 0;
  const double worst = excess.maxCoeff(&arg);
  return {worst, times[static_cast<std::size_t>(arg)]};
}

NetworkSpec random_connected_homogeneous(int node_count, const BassParams& params, std::uint64_t seed) {
  if (node_count < 2) throw std::invalid_argument("need at least 2 nodes");
  Philox rng(seed);
  for (int attempt = 0; attempt < 10'000; ++attempt) {
    std::vector<std::pair<NodeId, NodeId>> skeleton;
    std::vector<int> component(static_cast<std::size_t>(node_count));
    for (int i = 0; i < node_count; ++i) component[i] = i;
    auto find = [&](int x) {
      while (component[x] != x) x = component[x] = component[component[x]];
      return x;
    };
    for (NodeId a = 0; a < node_count; ++a) {
      for (NodeId b = a + 1; b < node_count; ++b) {
        if (uniform01(rng) < 0.5) {
          skeleton.emplace_back(a, b);
          component[find(a)] = find(b);
        }
      }
    }
    int roots = 0;
    for (int i = 0; i < node_count; ++i) roots += find(i) == i;
    if (roots != 1) continue;

    NetworkBuilder builder(node_count, params.p);
    for (auto [a, b] : skeleton) {
      builder.add_edge(a, b, 0.1 + 0.9 * uniform01(rng));
      builder.add_edge(b, a, 0.1 + 0.9 * uniform01(rng));
    }
    return homogenize(builder.build(), params.p, params.q).with_metadata("random_connected(M=" +
                                                                  std::to_string(node_count) + ")");
  }
  throw std::runtime_error("failed to draw a connected skeleton");
}

ConjectureResult conjecture_experiment(int node_count, const BassParams& params, int sample_count, std::uint64_t seed,
                                       std::span<const double> times, unsigned threads) {
  if (node_count < 2 || node_count > kMaxExactNodes) throw std::invalid_argument("node count outside exact range");
  if (sample_count < 1) throw std::invalid_argument("sample count must be >= 1");
  if (!(params.q > 0.0)) throw std::invalid_argument("conjecture experiment requires q > 0");

  ConjectureResult result;
  result.node_count = node_count;
  result.params = params;
  result.times = Eigen::Map<const Eigen::VectorXd>(times.data(), static_cast<Eigen::Index>(times.size()));
  result.complete = solve_complete(node_count, params, times).mean;
  result.samples.resize(static_cast<std::size_t>(sample_count));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto work = [&] {
    try {
      for (int i = next++; i < sample_count && !failed; i = next++) {
        const std::uint64_t s = split_seed(seed, static_cast<std::uint64_t>(i));
        const NetworkSpec net = random_connected_homogeneous(node_count, params, s);
        const ExactCurve exact = solve_master(net, times);
        const Eigen::VectorXd excess = exact.curve.mean - result.complete;
        Eigen::Index arg = 0;
        const double worst = excess.maxCoeff(&arg);
        result.samples[static_cast<std::size_t>(i)] = {s, net.edge_count(), worst, times[static_cast<std::size_t>(arg)]};
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(sample_count));
  {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < result.samples.size(); ++i) {
    result.max_excess = std::max(result.max_excess, result.samples[i].max_excess);
    if (result.samples[i].max_excess > kExactSlack) result.candidates.push_back(i);
  }
  return result;
}

}  // namespace bassnet
