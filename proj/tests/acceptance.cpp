// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "../tools/commands.hpp"
#include "bassnet/bounds.hpp"
#include "bassnet/exact.hpp"
#include "bassnet/io.hpp"
#include "bassnet/montecarlo.hpp"
#include "bassnet/rng.hpp"
#include "oracles.hpp"

using namespace bassnet;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::vector<double> grid(double t_max, int points) {
  const Eigen::VectorXd g = uniform_grid(t_max, points);
  return {g.data(), g.data() + g.size()};
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "bassnet");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

std::vector<std::vector<double>> read_csv_numbers(const fs::path& path) {
  std::istringstream is(io::read_text(path));
  std::string line;
  std::getline(is, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) row.push_back(f.empty() ? NAN : std::stod(f));
    if (!line.empty() && line.back() == ',') row.push_back(NAN);
    rows.push_back(row);
  }
  return rows;
}

// Directed network with homogeneous or random p and random weights, q_j > 0.
NetworkSpec random_network(int m, std::uint64_t seed, bool homogeneous_p) {
  Philox rng(seed);
  Eigen::VectorXd p(m);
  for (int j = 0; j < m; ++j) p(j) = homogeneous_p ? 0.02 : 0.01 + 0.1 * uniform01(rng);
  NetworkBuilder b(p);
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < m; ++j) {
      if (k != j && uniform01(rng) < 0.5) b.add_edge(k, j, 0.02 + 0.3 * uniform01(rng));
    }
  }
  for (int j = 0; j < m; ++j) b.add_edge((j + 1) % m, j, 0.02);
  return b.build();
}

Outcome c1_formula_vs_ode() {
  double worst = 0.0;
  for (const BassParams bp : {BassParams(0.01, 0.1), BassParams(1, 1), BassParams(0.1, 10)}) {
    const auto times = grid(10.0 / (bp.p + bp.q), 1001);
    const auto ode =
        oracle::rk4_adaptive([&](double, double f) { return (1 - f) * (bp.p + bp.q * f); }, 0.0, times, 1e-13);
    for (std::size_t i = 0; i < times.size(); ++i) worst = std::max(worst, std::abs(f_bass(times[i], bp) - ode[i]));
  }
  return {worst <= 1e-8, "max |f_bass - RK4| = " + fmt(worst)};
}

Outcome c2_two_node() {
  double worst = 0.0;
  for (const BassParams bp : {BassParams(0.01, 0.1), BassParams(1, 2), BassParams(0.3, 0.3), BassParams(0.1, 0.01)}) {
    const auto times = grid(20.0 / bp.p, 201);
    const auto sol = solve_master(make_pairs(2, bp.p, bp.q), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      worst = std::max(worst, std::abs(sol.curve.mean(static_cast<Eigen::Index>(i)) - f_two_node(times[i], bp)));
    }
  }
  return {worst <= 1e-9, "max |master - closed form| = " + fmt(worst) + " (incl. p = q)"};
}

Outcome c3_complete_ladder() {
  const BassParams bp(0.01, 0.1);
  const std::vector<double> probe{0.0, 1.0 / (bp.p + bp.q)};
  double prev = 0.0, min_step = INFINITY;
  bool increasing = true;
  for (int m = 2; m <= 50; ++m) {
    const double f = solve_complete(m, bp, probe).mean(1);
    if (m > 2) min_step = std::min(min_step, f - prev);
    increasing = increasing && f > prev;
    prev = f;
  }
  const std::vector<double> at10{0.0, 10.0};
  const double gap = f_bass(10.0, bp) - solve_complete(200, bp, at10).mean(1);
  return {increasing && gap > 0.0 && gap < 2e-3,
          "min increment " + fmt(min_step) + ", f_bass - f_complete(200) at t=10 = " + fmt(gap)};
}

Outcome c4_exact_bounds() {
  const BassParams bp(0.01, 0.1);
  const auto times = grid(600.0, 121);
  struct Case {
    const char* name;
    NetworkSpec net;
  };
  const std::vector<Case> cases{
      {"complete", make_complete(12, bp.p, bp.q)},
      {"circle1", make_circle(12, bp.p, bp.q, CircleSides::One)},
      {"circle2", make_circle(12, bp.p, bp.q, CircleSides::Two)},
      {"grid2d", make_grid(2, 3, bp.p, bp.q)},
      {"pairs", make_pairs(12, bp.p, bp.q)},
      {"erdos_renyi", make_erdos_renyi(12, 4.0, bp.p, bp.q, 42)},
  };
  bool ok = true;
  double worst = INFINITY, pairs_dev = 0.0;
  std::string detail;
  for (const auto& c : cases) {
    const auto curve = solve_master(c.net, times).curve;
    const auto report = verify_bounds(curve, bp);
    ok = ok && report.ok() && curve.has_nodes();
    worst = std::min({worst, report.worst_node_margin_low, report.worst_node_margin_high});
    if (std::string(c.name) == "pairs") {
      pairs_dev = std::max(report.margin_low.cwiseAbs().maxCoeff(), std::abs(report.worst_node_margin_low));
      for (Eigen::Index j = 0; j < curve.node.cols(); ++j) {
        for (Eigen::Index i = 0; i < curve.size(); ++i) {
          pairs_dev = std::max(pairs_dev, std::abs(curve.node(i, j) - report.lower(i)));
        }
      }
    }
    if (!report.ok()) detail += std::string(" ") + c.name + " violated;";
  }
  ok = ok && pairs_dev <= 1e-9;
  return {ok, "6 families, worst node margin " + fmt(worst) + ", pairs |f_j - lower| <= " + fmt(pairs_dev) + detail};
}

Outcome c5_mc_bounds() {
  const BassParams bp(0.01, 0.1);
  const auto times = grid(100.0, 51);
  const auto circle = estimate_ensemble(make_circle(10000, bp.p, bp.q), times, 1000, 42);
  const auto circle_report = verify_bounds(circle, bp);
  double worst_z = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    worst_z = std::max(worst_z, std::abs(circle.mean(k) - f_one_d(times[i], bp)) / circle.std_error(k));
  }
  const auto er = estimate_ensemble(make_erdos_renyi(1000, 4.0, bp.p, bp.q, 42), times, 1000, 43);
  const auto er_report = verify_bounds(er, bp);
  const bool ok = circle_report.violation_fraction() <= 0.01 && er_report.violation_fraction() <= 0.01 && worst_z <= 3.0;
  return {ok, "flagged fraction circle " + fmt(circle_report.violation_fraction()) + ", ER " +
                  fmt(er_report.violation_fraction()) + "; circle vs f_one_d max |z| = " + fmt(worst_z)};
}

Outcome c6_strictness() {
  const BassParams bp(0.01, 0.1);
  const double probe = 1.0 / (bp.p + bp.q);
  const std::vector<double> times{0.0, probe};
  double worst = INFINITY;
  for (const auto& net : {make_complete(3, bp.p, bp.q), make_path(3, bp.p, bp.q)}) {
    const auto [low, high] = strictness_margin(solve_master(net, times).curve, bp, probe);
    worst = std::min({worst, low, high});
  }
  return {worst > 1e-6, "smallest margin at t = 1/(p+q): " + fmt(worst)};
}

Outcome c7_pair_sandwich() {
  bool ok = true;
  double worst = INFINITY;
  int instances = 0;
  for (int m = 2; m <= 6; ++m) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const auto net = random_network(m, 1000 * m + seed, true);
      const auto times = grid(300.0, 61);
      const auto report = pair_sandwich_check(net, times);
      ok = ok && report.all_hold;
      worst = std::min({worst, report.worst_lower, report.worst_upper});
      ++instances;
    }
  }
  return {ok, std::to_string(instances) + " instances, worst margin " + fmt(worst)};
}

Outcome c8_gap() {
  const auto g100 = gap_metrics(BassParams(0.01, 1.0));
  const auto g1e4 = gap_metrics(BassParams(0.01, 100.0));
  const bool ok = std::abs(g100.ratio - 0.1302) <= 5e-4 && *g100.relative_deviation < 0.05 &&
                  *g1e4.relative_deviation < *g100.relative_deviation;
  return {ok, "ratio(100) = " + fmt(g100.ratio) + ", asymptote " + fmt(*g100.asymptotic) + ", deviation " +
                  fmt(*g100.relative_deviation) + " -> " + fmt(*g1e4.relative_deviation) + " at 1e4"};
}

Outcome c9_monotonicity() {
  const auto times = grid(200.0, 21);
  MasterOptions opts;
  opts.rtol = opts.atol = 1e-12;
  double worst = INFINITY;
  long perturbations = 0;
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    const int m = 3 + static_cast<int>(inst % 4);
    const auto net = random_network(m, 500 + inst, false);
    const auto base = solve_master(net, times, opts).curve.node;
    const auto edges = net.edges();
    auto check = [&](const NetworkSpec& up) {
      const Eigen::MatrixXd diff = solve_master(up, times, opts).curve.node - base;
      worst = std::min(worst, diff.minCoeff());
      ++perturbations;
    };
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd p = net.external_rates();
      p(j) *= 1.1;
      NetworkBuilder b(p);
      for (const Edge& e : edges) b.add_edge(e.source, e.target, e.weight);
      check(b.build());
    }
    for (std::size_t k = 0; k < edges.size(); ++k) {
      NetworkBuilder b(net.external_rates());
      for (std::size_t e = 0; e < edges.size(); ++e) {
        b.add_edge(edges[e].source, edges[e].target, edges[e].weight * (e == k ? 1.1 : 1.0));
      }
      check(b.build());
    }
  }
  return {worst >= -1e-10, std::to_string(perturbations) + " perturbations, min change in any f_m " + fmt(worst)};
}

Outcome c10_reproducible(const fs::path& dir) {
  const std::string net = (dir / "er.json").string();
  if (invoke({"gen", "--family", "erdos_renyi", "--M", "1000", "--lambda", "4", "--seed", "3", "-o", net}) != 0) {
    return {false, "gen failed"};
  }
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "4"}) {
    const std::string out = (dir / (std::string("mc_") + threads + ".csv")).string();
    if (invoke({"mc", "--net", net, "--t-max", "150", "--points", "61", "--runs", "1000", "--seed", "7", "--threads",
                threads, "-o", out}) != 0) {
      return {false, "mc failed"};
    }
    outputs.push_back(io::read_text(out));
  }
  return {outputs[0] == outputs[1], "1 vs 4 threads: " + std::string(outputs[0] == outputs[1] ? "identical" : "differ") +
                                        " (" + std::to_string(outputs[0].size()) + " bytes)"};
}

Outcome c11_figure(const fs::path& dir) {
  const fs::path out = dir / "figure1";
  if (invoke({"figure1", "--out-dir", out.string()}) != 0) return {false, "figure1 failed"};
  for (const char* panel : {"a", "b", "c", "d"}) {
    for (const char* ext : {".svg", ".csv"}) {
      if (!fs::exists(out / (std::string("panel_") + panel + ext))) return {false, std::string("missing panel ") + panel};
    }
  }
  auto max_gap = [&](const char* panel) {
    double gap = 0.0;
    for (const auto& row : read_csv_numbers(out / (std::string("panel_") + panel + ".csv"))) {
      gap = std::max(gap, row.at(3) - row.at(2));
    }
    return gap;
  };
  const double gap_a = max_gap("a"), gap_c = max_gap("c");
  double worst_d = 0.0;
  for (const auto& row : read_csv_numbers(out / "panel_d.csv")) {
    if (row.at(0) >= 100.0) worst_d = std::max(worst_d, std::abs(row.at(1) - row.at(2)) / row.at(2));
  }
  return {gap_a < 0.01 && gap_c > 0.4 && worst_d < 0.05,
          "4 SVG + CSV; gap A " + fmt(gap_a) + ", gap C " + fmt(gap_c) + ", D deviation (lambda >= 100) " + fmt(worst_d)};
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / ("bassnet_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "Bass formula vs RK4 integration", c1_formula_vs_ode},
      {2, "two-node master equation vs closed form", c2_two_node},
      {3, "complete-network ladder and convergence", c3_complete_ladder},
      {4, "universal bounds, exact regime", c4_exact_bounds},
      {5, "universal bounds, Monte Carlo regime", c5_mc_bounds},
      {6, "strictness on 3-node complete and path", c6_strictness},
      {7, "pair sandwich", c7_pair_sandwich},
      {8, "gap asymptotics", c8_gap},
      {9, "monotonicity in rates", c9_monotonicity},
      {10, "mc reproducibility across threads", [&] { return c10_reproducible(dir); }},
      {11, "figure reproduction", [&] { return c11_figure(dir); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome{false, ""};
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !outcome.pass;
    std::printf("%s  %2d  %-42s %8.2f s  %s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(dir);
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
