#include "bassnet/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "bassnet/hazard_tree.hpp"
#include "bassnet/rng.hpp"

namespace bassnet {

namespace {

constexpr long kBlockSize = 64;
constexpr int kRebuildInterval = 1024;

// Welford accumulator per grid point.
struct Moments {
  long count = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;

  explicit Moments(Eigen::Index g = 0) : mean(Eigen::VectorXd::Zero(g)), m2(Eigen::VectorXd::Zero(g)) {}

  void push(const Eigen::VectorXd& x) {
    ++count;
    const Eigen::VectorXd delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta.cwiseProduct(x - mean);
  }

  void merge(const Moments& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double n = static_cast<double>(count + other.count);
    const Eigen::VectorXd delta = other.mean - mean;
    mean += delta * (static_cast<double>(other.count) / n);
    m2 += other.m2 + delta.cwiseAbs2() * (static_cast<double>(count) * static_cast<double>(other.count) / n);
    count += other.count;
  }
};

}  // namespace

int TrajectoryRecord::adopted_by(double t) const {
  return static_cast<int>(std::count_if(adoption_times.begin(), adoption_times.end(), [t](double a) { return a <= t; }));
}

Simulator::Simulator(const NetworkSpec& net)
    : p_(net.external_rates().data(), net.external_rates().data() + net.node_count()), outgoing_(net.outgoing()) {
  if (const auto violations = validate(net, /*allow_isolated=*/true); !violations.empty()) {
    throw std::invalid_argument("invalid network: " + violations.front().message);
  }
}

TrajectoryRecord Simulator::run(double t_max, std::uint64_t seed) const {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be positive and finite");
  const std::size_t m = p_.size();
  TrajectoryRecord record;
  record.seed = seed;
  record.t_max = t_max;
  record.adoption_times.assign(m, TrajectoryRecord::kCensored);

  Philox rng(seed);
  HazardTree hazards(p_);
  double t = 0.0;
  std::size_t adopted = 0;
  int since_rebuild = 0;
  while (adopted < m) {
    const double total = hazards.total();
    if (!(total > 0.0)) break;
    t += exponential(rng, total);
    if (t > t_max) break;

    std::size_t j = hazards.find(uniform01(rng) * total);
    // Rounding in the partial sums can land on an adopted node (hazard 0).
    while (hazards.value(j) <= 0.0) {
      hazards.rebuild();
      j = hazards.find(uniform01(rng) * hazards.total());
    }

    record.adoption_times[j] = t;
    ++adopted;
    hazards.set(j, 0.0);
    for (const auto& e : outgoing_[j]) {
      if (record.adoption_times[static_cast<std::size_t>(e.source)] == TrajectoryRecord::kCensored) {
        hazards.add(static_cast<std::size_t>(e.source), e.weight);
      }
    }
    if (++since_rebuild == kRebuildInterval) {
      hazards.rebuild();
      since_rebuild = 0;
    }
  }
  return record;
}

TrajectoryRecord simulate_trajectory(const NetworkSpec& net, double t_max, std::uint64_t seed) {
  return Simulator(net).run(t_max, seed);
}

std::uint64_t trajectory_seed(std::uint64_t base_seed, std::uint64_t index) { return split_seed(base_seed, index); }

EnsembleEstimate estimate_ensemble(const NetworkSpec& net, std::span<const double> times, long runs,
                                   std::uint64_t base_seed, const EnsembleOptions& options) {
  if (runs < 2) throw std::invalid_argument("ensemble needs at least 2 runs");
  if (times.empty()) throw std::invalid_argument("time grid is empty");
  if (times.front() < 0.0) throw std::invalid_argument("time grid must be non-negative");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
  }
  const Simulator simulator(net);
  const int m = simulator.node_count();
  const auto g = static_cast<Eigen::Index>(times.size());
  const double t_max = std::max(times.back(), std::numeric_limits<double>::min());

  const long blocks = (runs + kBlockSize - 1) / kBlockSize;
  std::vector<Moments> block_moments(static_cast<std::size_t>(blocks), Moments(g));
  unsigned workers = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  workers = static_cast<unsigned>(std::min<long>(workers, blocks));
  // Per-worker integer counts; integer sums are order independent.
  std::vector<std::vector<std::uint32_t>> node_counts(
      workers, std::vector<std::uint32_t>(options.per_node ? static_cast<std::size_t>(g * m) : 0, 0));

  std::atomic<long> next_block{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};

  auto work = [&](unsigned worker) {
    try {
      std::vector<double> sorted;
      Eigen::VectorXd fraction(g);
      for (long b = next_block++; b < blocks && !failed; b = next_block++) {
        Moments& acc = block_moments[static_cast<std::size_t>(b)];
        const long end = std::min(runs, (b + 1) * kBlockSize);
        for (long r = b * kBlockSize; r < end; ++r) {
          const TrajectoryRecord rec = simulator.run(t_max, trajectory_seed(base_seed, static_cast<std::uint64_t>(r)));
          sorted.clear();
          for (double a : rec.adoption_times) {
            if (a != TrajectoryRecord::kCensored) sorted.push_back(a);
          }
          std::sort(sorted.begin(), sorted.end());
          std::size_t count = 0;
          for (Eigen::Index i = 0; i < g; ++i) {
            const std::size_t before = count;
            while (count < sorted.size() && sorted[count] <= times[static_cast<std::size_t>(i)]) ++count;
            if (count < before) throw std::logic_error("adoption count decreased");
            fraction(i) = static_cast<double>(count) / m;
          }
          acc.push(fraction);
          if (options.per_node) {
            auto& counts = node_counts[worker];
            for (int j = 0; j < m; ++j) {
              const double a = rec.adoption_times[static_cast<std::size_t>(j)];
              for (Eigen::Index i = g - 1; i >= 0 && a <= times[static_cast<std::size_t>(i)]; --i) {
                ++counts[static_cast<std::size_t>(i * m + j)];
              }
            }
          }
        }
      }
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };

  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  Moments total(g);
  for (const auto& bm : block_moments) total.merge(bm);

  EnsembleEstimate est;
  est.times = Eigen::Map<const Eigen::VectorXd>(times.data(), g);
  est.mean = total.mean.cwiseMax(0.0).cwiseMin(1.0);
  const double r = static_cast<double>(runs);
  est.std_error = (total.m2.cwiseMax(0.0) / (r - 1.0) / r).cwiseSqrt();
  est.source = CurveSource::MonteCarlo;
  est.node_count = m;
  est.seed = base_seed;
  est.runs = runs;
  const auto h = check_homogeneity(net);
  if (h.is_p_homogeneous && h.is_q_homogeneous) est.params = BassParams(h.p_max, h.q_max);
  if (options.per_node) {
    est.node = Eigen::MatrixXd::Zero(g, m);
    for (const auto& counts : node_counts) {
      for (Eigen::Index i = 0; i < g; ++i) {
        for (int j = 0; j < m; ++j) est.node(i, j) += counts[static_cast<std::size_t>(i * m + j)];
      }
    }
    est.node /= r;
  }
  return est;
}

}  // namespace bassnet
