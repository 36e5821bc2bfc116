#include "bassnet/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "bassnet/ode.hpp"

namespace bassnet {

namespace {

void check_grid(std::span<const double> times) {
  if (times.empty()) throw ExactSolverError("time grid is empty");
  if (times.front() != 0.0) throw ExactSolverError("time grid must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ExactSolverError("time grid must be strictly increasing");
  }
}

// Rates of the subset chain. Below the table threshold the per-(S, j) rates are
// precomputed; above it they are recomputed from the incoming lists.
class SubsetGenerator {
 public:
  static constexpr int kTableNodes = 16;

  explicit SubsetGenerator(const NetworkSpec& net)
      : m_(net.node_count()), states_(std::size_t{1} << m_), p_(net.external_rates()) {
    incoming_.reserve(static_cast<std::size_t>(m_));
    for (NodeId j = 0; j < m_; ++j) incoming_.push_back(net.incoming(j));
    exit_.resize(static_cast<Eigen::Index>(states_));
    if (m_ <= kTableNodes) table_.resize(states_ * static_cast<std::size_t>(m_), 0.0);
    for (std::size_t s = 0; s < states_; ++s) {
      double total = 0.0;
      for (int j = 0; j < m_; ++j) {
        if (s & (std::size_t{1} << j)) continue;
        const double r = direct_rate(s, j);
        total += r;
        if (!table_.empty()) table_[s * m_ + j] = r;
      }
      exit_(static_cast<Eigen::Index>(s)) = total;
    }
  }

  double rate(std::size_t s, int j) const {
    return table_.empty() ? direct_rate(s, j) : table_[s * m_ + j];
  }

  double direct_rate(std::size_t s, int j) const {
    double r = p_(j);
    for (const auto& e : incoming_[j]) {
      if (s & (std::size_t{1} << e.source)) r += e.weight;
    }
    return r;
  }

  void apply(const Eigen::VectorXd& prob, Eigen::VectorXd& dprob) const {
    dprob = -exit_.cwiseProduct(prob);
    for (std::size_t s = 0; s + 1 < states_; ++s) {
      const double ps = prob(static_cast<Eigen::Index>(s));
      if (ps == 0.0) continue;
      for (int j = 0; j < m_; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        if (s & bit) continue;
        dprob(static_cast<Eigen::Index>(s | bit)) += rate(s, j) * ps;
      }
    }
  }

  std::size_t states() const noexcept { return states_; }

 private:
  int m_;
  std::size_t states_;
  Eigen::VectorXd p_;
  std::vector<std::vector<InEdge>> incoming_;
  Eigen::VectorXd exit_;
  std::vector<double> table_;
};

}  // namespace

ExactCurve solve_master(const NetworkSpec& net, std::span<const double> times, const MasterOptions& options) {
  return solve_master(net, times, options, nullptr);
}

ExactCurve solve_master(const NetworkSpec& net, std::span<const double> times, const MasterOptions& options,
                        StateDistribution* final_state) {
  const int m = net.node_count();
  if (m > kMaxExactNodes) {
    throw ExactSolverError("exact solver supports at most " + std::to_string(kMaxExactNodes) + " nodes (got " +
                           std::to_string(m) + "); use Monte Carlo instead");
  }
  if (const auto violations = validate(net, options.allow_isolated); !violations.empty()) {
    throw ExactSolverError("invalid network: " + violations.front().message);
  }
  check_grid(times);

  std::vector<std::pair<int, int>> pairs = options.pairs;
  if (options.all_pairs) {
    pairs.clear();
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
    }
  }
  for (auto [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= m || j >= m || i == j) throw ExactSolverError("invalid node pair");
  }

  const SubsetGenerator generator(net);
  const auto g = static_cast<Eigen::Index>(times.size());

  ExactCurve out;
  out.pairs = pairs;
  out.pair_nonadoption.assign(pairs.size(), Eigen::VectorXd::Zero(g));
  AdoptionCurve& curve = out.curve;
  curve.times = Eigen::Map<const Eigen::VectorXd>(times.data(), g);
  curve.mean.resize(g);
  curve.node.resize(g, m);
  curve.source = CurveSource::Exact;
  curve.node_count = m;
  const auto h = check_homogeneity(net);
  if (h.is_p_homogeneous && h.is_q_homogeneous) curve.params = BassParams(h.p_max, h.q_max);

  Eigen::VectorXd initial = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(generator.states()));
  initial(0) = 1.0;

  auto observe = [&](std::size_t index, const Eigen::VectorXd& prob) {
    const auto row = static_cast<Eigen::Index>(index);
    Eigen::VectorXd adopted = Eigen::VectorXd::Zero(m);
    double total = 0.0;
    for (Eigen::Index s = 0; s < prob.size(); ++s) {
      const double ps = std::max(prob(s), 0.0);
      total += ps;
      for (int j = 0; j < m; ++j) {
        if (s & (Eigen::Index{1} << j)) adopted(j) += ps;
      }
    }
    out.max_mass_error = std::max(out.max_mass_error, std::abs(total - 1.0));
    for (int j = 0; j < m; ++j) curve.node(row, j) = std::clamp(adopted(j), 0.0, 1.0);
    curve.mean(row) = curve.node.row(row).mean();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const Eigen::Index mask = (Eigen::Index{1} << pairs[k].first) | (Eigen::Index{1} << pairs[k].second);
      double both = 0.0;
      for (Eigen::Index s = 0; s < prob.size(); ++s) {
        if ((s & mask) == 0) both += std::max(prob(s), 0.0);
      }
      out.pair_nonadoption[k](row) = std::clamp(both, 0.0, 1.0);
    }
    if (final_state != nullptr && index + 1 == times.size()) {
      final_state->time = times[index];
      final_state->probabilities = prob.cwiseMax(0.0);
    }
  };

  OdeOptions ode;
  ode.rtol = options.rtol;
  ode.atol = options.atol;
  try {
    integrate_dopri5<double>([&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) { generator.apply(y, dy); },
                             std::move(initial), times, observe, ode);
  } catch (const OdeError& e) {
    throw ExactSolverError(std::string("master equation integration failed: ") + e.what());
  }
  return out;
}

AdoptionCurve solve_complete(int node_count, const BassParams& params, std::span<const double> times,
                             double tolerance) {
  if (node_count < 1) throw ExactSolverError("complete network needs M >= 1");
  check_grid(times);
  const int m = node_count;
  Eigen::VectorXd birth(m + 1);
  for (int n = 0; n <= m; ++n) {
    const double influence = m == 1 ? 0.0 : params.q * n / (m - 1);
    birth(n) = (m - n) * (params.p + influence);
  }

  const auto g = static_cast<Eigen::Index>(times.size());
  AdoptionCurve curve;
  curve.times = Eigen::Map<const Eigen::VectorXd>(times.data(), g);
  curve.mean.resize(g);
  curve.source = CurveSource::Exact;
  curve.node_count = m;
  curve.params = params;

  const Eigen::VectorXd count = Eigen::VectorXd::LinSpaced(m + 1, 0.0, static_cast<double>(m));
  Eigen::VectorXd initial = Eigen::VectorXd::Zero(m + 1);
  initial(0) = 1.0;

  OdeOptions ode;
  ode.rtol = tolerance;
  ode.atol = tolerance;
  try {
    integrate_dopri5<double>(
        [&](double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
          const Eigen::VectorXd flow = birth.cwiseProduct(y);
          dy = -flow;
          dy.tail(m) += flow.head(m);
        },
        std::move(initial), times,
        [&](std::size_t i, const Eigen::VectorXd& y) {
          curve.mean(static_cast<Eigen::Index>(i)) = std::clamp(y.cwiseMax(0.0).dot(count) / m, 0.0, 1.0);
        },
        ode);
  } catch (const OdeError& e) {
    throw ExactSolverError(std::string("birth chain integration failed: ") + e.what());
  }
  return curve;
}

PairSandwichReport pair_sandwich_check(const NetworkSpec& net, std::span<const double> times, double slack,
                                       bool allow_isolated) {
  const auto h = check_homogeneity(net);
  if (!h.is_p_homogeneous) throw ExactSolverError("pair sandwich requires homogeneous p_j");
  MasterOptions options;
  options.all_pairs = true;
  options.allow_isolated = allow_isolated;
  const ExactCurve exact = solve_master(net, times, options);
  const double p = h.p_max;

  const auto g = static_cast<Eigen::Index>(times.size());
  PairSandwichReport report;
  report.slack = slack;
  report.holds.assign(times.size(), true);
  report.lower_margin = Eigen::VectorXd::Constant(g, std::numeric_limits<double>::infinity());
  report.upper_margin = Eigen::VectorXd::Constant(g, std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < exact.pairs.size(); ++k) {
    const auto [i, j] = exact.pairs[k];
    for (Eigen::Index r = 0; r < g; ++r) {
      const double si = 1.0 - exact.curve.node(r, i);
      const double sj = 1.0 - exact.curve.node(r, j);
      const double joint = exact.pair_nonadoption[k](r);
      const double ceiling = std::exp(-2.0 * p * times[static_cast<std::size_t>(r)]);
      report.lower_margin(r) = std::min(report.lower_margin(r), joint - si * sj);
      report.upper_margin(r) = std::min(report.upper_margin(r), ceiling - joint);
    }
  }
  for (Eigen::Index r = 0; r < g; ++r) {
    const bool ok = report.lower_margin(r) >= -slack && report.upper_margin(r) >= -slack;
    report.holds[static_cast<std::size_t>(r)] = ok;
    report.all_hold = report.all_hold && ok;
  }
  report.worst_lower = report.lower_margin.minCoeff();
  report.worst_upper = report.upper_margin.minCoeff();
  return report;
}

}  // namespace bassnet
