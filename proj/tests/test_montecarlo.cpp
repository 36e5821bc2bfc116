#include <doctest.h>

#include <cmath>
#include <vector>

#include "bassnet/exact.hpp"
#include "bassnet/hazard_tree.hpp"
#include "bassnet/montecarlo.hpp"
#include "bassnet/rng.hpp"

using namespace bassnet;

namespace {

std::vector<double> grid(double t_max, int points) {
  const Eigen::VectorXd g = uniform_grid(t_max, points);
  return {g.data(), g.data() + g.size()};
}

}  // namespace

TEST_CASE("hazard tree sums and searches") {
  HazardTree tree(std::vector<double>{0.5, 0.0, 1.5, 2.0});
  CHECK(tree.total() == doctest::Approx(4.0));
  CHECK(tree.find(0.25) == 0);
  CHECK(tree.find(0.75) == 2);
  CHECK(tree.find(2.1) == 3);
  tree.set(2, 0.0);
  tree.add(1, 1.0);
  CHECK(tree.value(1) == 1.0);
  CHECK(tree.total() == doctest::Approx(3.5));
  CHECK(tree.find(0.9) == 1);
  CHECK(tree.find(3.4) == 3);
}

TEST_CASE("trajectory records are reproducible and well formed") {
  const auto net = make_circle(200, 0.01, 0.1);
  const auto a = simulate_trajectory(net, 80.0, 123);
  const auto b = simulate_trajectory(net, 80.0, 123);
  const auto c = simulate_trajectory(net, 80.0, 124);
  CHECK(a.adoption_times == b.adoption_times);
  CHECK(a.adoption_times != c.adoption_times);
  CHECK(a.seed == 123);
  int adopted = 0;
  for (double t : a.adoption_times) {
    if (t == TrajectoryRecord::kCensored) continue;
    CHECK(t > 0.0);
    CHECK(t <= 80.0);
    ++adopted;
  }
  CHECK(a.adopted_by(80.0) == adopted);
  CHECK(a.adopted_by(0.0) == 0);
  CHECK(adopted > 0);
  CHECK(adopted < 200);
  CHECK_THROWS_AS(simulate_trajectory(net, 0.0, 1), std::invalid_argument);
}

TEST_CASE("external-only adoption times are exponential") {
  const double p = 0.5;
  const Simulator sim(NetworkBuilder(10, p).build());
  double sum = 0.0;
  long n = 0;
  for (std::uint64_t r = 0; r < 10000; ++r) {
    for (double t : sim.run(1e6, trajectory_seed(5, r)).adoption_times) {
      sum += t;
      ++n;
    }
  }
  CHECK(n == 100000);
  const double se = (1.0 / p) / std::sqrt(double(n));
  CHECK(std::abs(sum / n - 1.0 / p) <= 3 * se);
}

TEST_CASE("two-node joint adoption matches the exact solver") {
  const auto net = make_pairs(2, 0.01, 0.1);
  const std::vector<double> times{0.0, 25.0, 75.0, 200.0};
  MasterOptions opts;
  opts.pairs = {{0, 1}};
  const auto exact = solve_master(net, times, opts);
  const Simulator sim(net);
  const long runs = 100000;
  std::vector<long> both(times.size(), 0);
  for (long r = 0; r < runs; ++r) {
    const auto rec = sim.run(times.back(), trajectory_seed(77, static_cast<std::uint64_t>(r)));
    for (std::size_t i = 0; i < times.size(); ++i) both[i] += rec.adopted_by(times[i]) == 2;
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double want = 1 - (1 - exact.curve.node(k, 0)) - (1 - exact.curve.node(k, 1)) + exact.pair_nonadoption[0](k);
    const double got = double(both[i]) / runs;
    const double se = std::sqrt(want * (1 - want) / runs);
    CHECK(std::abs(got - want) <= 3 * se);
  }
}

TEST_CASE("ensemble estimates") {
  SUBCASE("two-node network") {
    const BassParams bp(0.01, 0.1);
    const auto times = grid(300.0, 16);
    const auto est = estimate_ensemble(make_pairs(2, bp.p, bp.q), times, 100000, 3);
    CHECK(est.mean(0) == 0.0);
    CHECK(est.runs == 100000);
    REQUIRE(est.params.has_value());
    for (std::size_t i = 1; i < times.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      CHECK(std::abs(est.mean(k) - f_two_node(times[i], bp)) <= 3 * est.std_error(k));
    }
  }
  SUBCASE("complete network") {
    const BassParams bp(0.01, 0.1);
    const auto times = grid(60.0, 13);
    const auto est = estimate_ensemble(make_complete(50, bp.p, bp.q), times, 10000, 4);
    const auto exact = solve_complete(50, bp, times);
    for (Eigen::Index k = 1; k < est.size(); ++k) CHECK(std::abs(est.mean(k) - exact.mean(k)) <= 3 * est.std_error(k));
  }
}

TEST_CASE("ensemble does not depend on the thread count") {
  const auto net = make_erdos_renyi(300, 4.0, 0.01, 0.1, 2);
  const auto times = grid(50.0, 11);
  EnsembleOptions one, many;
  one.threads = 1;
  many.threads = 5;
  one.per_node = many.per_node = true;
  const auto a = estimate_ensemble(net, times, 700, 9, one);
  const auto b = estimate_ensemble(net, times, 700, 9, many);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.node == b.node);
  CHECK(a.node.rows() == 11);
  CHECK(a.node.cols() == 300);
  // Per-node columns average to the aggregate.
  for (Eigen::Index k = 0; k < a.size(); ++k) CHECK(a.node.row(k).mean() == doctest::Approx(a.mean(k)));
}

TEST_CASE("standard error shrinks as one over root R") {
  const auto net = make_circle(50, 0.05, 0.5);
  const std::vector<double> times{0.0, 5.0};
  const auto small = estimate_ensemble(net, times, 500, 1);
  const auto large = estimate_ensemble(net, times, 8000, 1);
  const double ratio = small.std_error(1) / large.std_error(1);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("raising p does not lower the estimate") {
  const auto times = grid(40.0, 9);
  const auto base = estimate_ensemble(make_circle(100, 0.01, 0.1), times, 2000, 6);
  const auto up = estimate_ensemble(make_circle(100, 0.011, 0.1), times, 2000, 6);
  for (Eigen::Index k = 1; k < base.size(); ++k) {
    const double se = std::hypot(base.std_error(k), up.std_error(k));
    CHECK(up.mean(k) >= base.mean(k) - 3 * se);
  }
}

TEST_CASE("invalid ensemble input") {
  const auto net = make_pairs(2, 0.01, 0.1);
  const std::vector<double> times{0.0, 1.0};
  CHECK_THROWS_AS(estimate_ensemble(net, times, 1, 0), std::invalid_argument);
  const std::vector<double> unsorted{0.0, 2.0, 1.0};
  CHECK_THROWS_AS(estimate_ensemble(net, unsorted, 10, 0), std::invalid_argument);
}
