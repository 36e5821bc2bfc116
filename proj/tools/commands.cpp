#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "bassnet/analytic.hpp"
#include "bassnet/bounds.hpp"
#include "bassnet/exact.hpp"
#include "bassnet/io.hpp"
#include "bassnet/montecarlo.hpp"
#include "bassnet/network.hpp"
#include "bassnet/svg.hpp"

namespace bassnet::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Bad flag value or combination; maps to kExitUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  std::string command_line;
  std::ostream& out;
  std::ostream& err;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("BASSNET_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used, 10);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("BASSNET_SEED must be an unsigned integer");
  }
  return kDefaultSeed;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(std::string("--") + name + " must be positive");
}

void write_run_meta(const fs::path& output, const Context& ctx, ordered_json fields) {
  fields["command"] = ctx.command_line;
  io::write_text(io::sidecar_path(output), fields.dump(2) + "\n");
}

std::vector<double> grid_vector(double t_max, int points) {
  require_positive(t_max, "t-max");
  if (points < 2) throw UsageError("--points must be at least 2");
  const Eigen::VectorXd g = uniform_grid(t_max, points);
  return {g.data(), g.data() + g.size()};
}

// Lower/upper parameter pair for a network: min/max of p_j and q_j.
std::pair<BassParams, BassParams> bound_params(const NetworkSpec& net) {
  const auto h = check_homogeneity(net);
  return {BassParams(h.p_min, h.q_min), BassParams(h.p_max, h.q_max)};
}

// ---------------------------------------------------------------- gen

struct GenFlags {
  FamilyParams family;
  int sides = 2;
  std::optional<std::uint64_t> seed;
  std::string output;
};

int cmd_gen(const GenFlags& f, const Context& ctx) {
  FamilyParams params = f.family;
  if (f.sides != 1 && f.sides != 2) throw UsageError("--sides must be 1 or 2");
  params.sides = f.sides == 1 ? CircleSides::One : CircleSides::Two;
  const std::uint64_t seed = f.seed.value_or(default_seed());
  NetworkSpec net;
  try {
    net = generate(params, seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  io::write_network(f.output, net);
  const auto h = check_homogeneity(net);
  write_run_meta(f.output, ctx,
                 ordered_json{{"subcommand", "gen"}, {"family", params.family}, {"M", net.node_count()},
                              {"p", params.p}, {"q", params.q}, {"seed", seed}});
  ctx.out << "M=" << net.node_count() << " edges=" << net.edge_count() << " q_j in [" << io::format_double(h.q_min)
          << ", " << io::format_double(h.q_max) << "] -> " << f.output << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- exact

struct SolveFlags {
  std::string net;
  double t_max = 0.0;
  int points = 101;
  long runs = 1000;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool per_node = false;
  std::string output;
};

int cmd_exact(const SolveFlags& f, const Context& ctx) {
  const NetworkSpec net = io::read_network(f.net);
  if (net.node_count() > kMaxExactNodes) {
    throw UsageError("exact solver supports at most " + std::to_string(kMaxExactNodes) + " nodes (network has " +
                     std::to_string(net.node_count()) + "); use `mc` instead");
  }
  const auto times = grid_vector(f.t_max, f.points);
  MasterOptions options;
  options.allow_isolated = true;
  const ExactCurve exact = solve_master(net, times, options);
  const auto [lower, upper] = bound_params(net);
  io::write_curve(f.output, exact.curve, lower, upper, ctx.command_line);
  ctx.out << "exact: M=" << net.node_count() << " points=" << times.size()
          << " f(t_max)=" << io::format_double(exact.curve.mean(exact.curve.size() - 1)) << " -> " << f.output << '\n';
  return kExitOk;
}

int cmd_mc(const SolveFlags& f, const Context& ctx) {
  const NetworkSpec net = io::read_network(f.net);
  const auto times = grid_vector(f.t_max, f.points);
  if (f.runs < 2) throw UsageError("--runs must be at least 2");
  const std::uint64_t seed = f.seed.value_or(default_seed());
  EnsembleOptions options;
  options.threads = f.threads;
  options.per_node = f.per_node;
  const EnsembleEstimate est = estimate_ensemble(net, times, f.runs, seed, options);
  const auto [lower, upper] = bound_params(net);
  io::write_curve(f.output, est, lower, upper, ctx.command_line);
  ctx.out << "mc: M=" << net.node_count() << " runs=" << f.runs << " seed=" << seed
          << " f(t_max)=" << io::format_double(est.mean(est.size() - 1)) << " -> " << f.output << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- bounds

struct BoundsFlags {
  std::string curve;
  std::string net;
  std::optional<double> p, q;
  std::optional<double> max_violation_fraction;
  std::string output;
};

int cmd_bounds(const BoundsFlags& f, const Context& ctx) {
  const io::CurveFile file = io::read_curve(f.curve);
  BoundsReport report;
  if (!f.net.empty()) {
    report = verify_bounds_inhomogeneous(file.curve, io::read_network(f.net));
  } else {
    std::optional<BassParams> params = file.curve.params;
    if (f.p || f.q) {
      if (!f.p || !f.q) throw UsageError("--p and --q must be given together");
      require_positive(*f.p, "p");
      require_positive(*f.q, "q");
      params = BassParams(*f.p, *f.q);
    }
    if (!params) throw UsageError("curve metadata lacks (p, q); pass --p/--q or --net");
    try {
      report = verify_bounds(file.curve, *params);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const double allowed =
      f.max_violation_fraction.value_or(file.curve.source == CurveSource::MonteCarlo ? 0.01 : 0.0);
  const bool pass = report.node_violations == 0 && report.violation_fraction() <= allowed;
  if (!f.output.empty()) {
    io::write_text(f.output, io::report_to_csv(report));
    write_run_meta(f.output, ctx,
                   ordered_json{{"subcommand", "bounds"},
                                {"curve", f.curve},
                                {"source", to_string(report.source)},
                                {"lower_p", report.lower_params.p},
                                {"lower_q", report.lower_params.q},
                                {"upper_p", report.upper_params.p},
                                {"upper_q", report.upper_params.q},
                                {"violations", report.violations},
                                {"node_violations", report.node_violations},
                                {"worst_margin_low", report.worst_margin_low},
                                {"worst_margin_high", report.worst_margin_high},
                                {"pass", pass}});
  }
  ctx.out << "bounds: points=" << report.times.size() << " violations=" << report.violations
          << " node_violations=" << report.node_violations
          << " worst_margin_low=" << io::format_double(report.worst_margin_low)
          << " worst_margin_high=" << io::format_double(report.worst_margin_high) << (pass ? " PASS" : " FAIL")
          << '\n';
  return pass ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------- gap

struct GapFlags {
  double p = 0.01;
  std::vector<double> lambdas{0.1, 1.0, 10.0, 100.0, 1000.0};
  std::string output;
};

std::string gap_csv(double p, const std::vector<double>& lambdas) {
  std::string csv = "lambda,p,q,t_half_lower,t_half_upper,ratio,asymptotic,relative_deviation\n";
  for (double lambda : lambdas) {
    const GapMetrics g = gap_metrics(BassParams(p, lambda * p));
    csv += io::format_double(lambda) + ',' + io::format_double(p) + ',' + io::format_double(lambda * p) + ',' +
           io::format_double(g.t_half_lower) + ',' + io::format_double(g.t_half_upper) + ',' +
           io::format_double(g.ratio) + ',' + (g.asymptotic ? io::format_double(*g.asymptotic) : "") + ',' +
           (g.relative_deviation ? io::format_double(*g.relative_deviation) : "") + '\n';
  }
  return csv;
}

int cmd_gap(const GapFlags& f, const Context& ctx) {
  require_positive(f.p, "p");
  if (f.lambdas.empty()) throw UsageError("--lambdas must list at least one value");
  for (double l : f.lambdas) require_positive(l, "lambdas");
  const std::string csv = gap_csv(f.p, f.lambdas);
  if (f.output.empty()) {
    ctx.out << csv;
  } else {
    io::write_text(f.output, csv);
    write_run_meta(f.output, ctx, ordered_json{{"subcommand", "gap"}, {"p", f.p}, {"lambdas", f.lambdas}});
    ctx.out << "gap: " << f.lambdas.size() << " rows -> " << f.output << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- conjecture

struct ConjectureFlags {
  int m = 4;
  double p = 0.01, q = 0.1;
  int samples = 200;
  double t_max = 0.0;
  int points = 101;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string output;
};

int cmd_conjecture(const ConjectureFlags& f, const Context& ctx) {
  require_positive(f.p, "p");
  require_positive(f.q, "q");
  if (f.m < 2 || f.m > kMaxExactNodes) throw UsageError("--M must lie in [2, 20]");
  if (f.samples < 1) throw UsageError("--samples must be at least 1");
  const double t_max = f.t_max > 0.0 ? f.t_max : 10.0 / (f.p + f.q) + 5.0 / f.p;
  const auto times = grid_vector(t_max, f.points);
  const std::uint64_t seed = f.seed.value_or(default_seed());
  const ConjectureResult r = conjecture_experiment(f.m, BassParams(f.p, f.q), f.samples, seed, times, f.threads);
  if (!f.output.empty()) {
    std::string csv = "sample,seed,edges,max_excess,time_of_max\n";
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      const auto& s = r.samples[i];
      csv += std::to_string(i) + ',' + std::to_string(s.seed) + ',' + std::to_string(s.edge_count) + ',' +
             io::format_double(s.max_excess) + ',' + io::format_double(s.time_of_max) + '\n';
    }
    io::write_text(f.output, csv);
    write_run_meta(f.output, ctx,
                   ordered_json{{"subcommand", "conjecture"}, {"M", f.m}, {"p", f.p}, {"q", f.q},
                                {"samples", f.samples}, {"seed", seed}, {"max_excess", r.max_excess},
                                {"candidates", r.candidates.size()}});
  }
  ctx.out << "conjecture: M=" << f.m << " samples=" << f.samples << " max_excess=" << io::format_double(r.max_excess)
          << " candidates=" << r.candidates.size() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- figure1

struct FigureFlags {
  std::string out_dir = "figure1";
  double p = 0.01;
  int points = 401;
  int lambda_points = 61;
};

int cmd_figure1(const FigureFlags& f, const Context& ctx) {
  require_positive(f.p, "p");
  if (f.points < 2 || f.lambda_points < 2) throw UsageError("--points and --lambda-points must be at least 2");
  fs::create_directories(f.out_dir);
  const fs::path dir(f.out_dir);

  struct Panel {
    const char* name;
    double lambda;
  };
  const Panel panels[] = {{"a", 0.1}, {"b", 10.0}, {"c", 100.0}};
  ordered_json summary{{"subcommand", "figure1"}, {"p", f.p}};
  for (const auto& panel : panels) {
    const BassParams params(f.p, panel.lambda * f.p);
    // Dimensionless time qt, or pt when q/p < 1.
    const bool by_p = panel.lambda < 1.0;
    const double rate = by_p ? params.p : params.q;
    svg::Series lower{{}, {}, "#ff7f0e", "two-node lower bound", true};
    svg::Series upper{{}, {}, "#1f77b4", "Bass upper bound", false};
    svg::Band band;
    std::string csv = "x,t,lower,upper,gap\n";
    double max_gap = 0.0;
    for (int i = 0; i < f.points; ++i) {
      const double x = 8.0 * i / (f.points - 1);
      const double t = x / rate;
      const double lo = f_two_node(t, params);
      const double hi = f_bass(t, params);
      max_gap = std::max(max_gap, hi - lo);
      lower.x.push_back(x);
      lower.y.push_back(lo);
      upper.x.push_back(x);
      upper.y.push_back(hi);
      csv += io::format_double(x) + ',' + io::format_double(t) + ',' + io::format_double(lo) + ',' +
             io::format_double(hi) + ',' + io::format_double(hi - lo) + '\n';
    }
    band.x = lower.x;
    band.lower = lower.y;
    band.upper = upper.y;
    std::ostringstream title;
    title << "(" << static_cast<char>(panel.name[0] - 'a' + 'A') << ") q/p = " << panel.lambda;
    svg::LinePlot plot(title.str(), by_p ? "pt" : "qt", "f");
    plot.y_range(0.0, 1.0).add(band).add(upper).add(lower);
    const std::string stem = std::string("panel_") + panel.name;
    io::write_text(dir / (stem + ".csv"), csv);
    io::write_text(dir / (stem + ".svg"), plot.render());
    summary[stem + "_max_gap"] = max_gap;
  }

  svg::Series exact{{}, {}, "#1f77b4", "exact ratio", false};
  svg::Series asym{{}, {}, "black", "asymptotic", true};
  std::string csv = "lambda,ratio,asymptotic\n";
  double worst_large = 0.0;
  for (int i = 0; i < f.lambda_points; ++i) {
    const double lambda = std::pow(10.0, 3.0 * i / (f.lambda_points - 1));
    const GapMetrics g = gap_metrics(BassParams(f.p, lambda * f.p));
    exact.x.push_back(lambda);
    exact.y.push_back(g.ratio);
    csv += io::format_double(lambda) + ',' + io::format_double(g.ratio) + ',';
    if (g.asymptotic) {
      asym.x.push_back(lambda);
      asym.y.push_back(*g.asymptotic);
      csv += io::format_double(*g.asymptotic);
      if (lambda >= 100.0) worst_large = std::max(worst_large, *g.relative_deviation);
    }
    csv += '\n';
  }
  svg::LinePlot plot("(D) half-life ratio", "q/p", "T_Bass / T_two-node");
  plot.log_x().y_range(0.0, 1.2).add(exact).add(asym);
  io::write_text(dir / "panel_d.csv", csv);
  io::write_text(dir / "panel_d.svg", plot.render());
  summary["panel_d_max_relative_deviation_lambda_ge_100"] = worst_large;
  summary["command"] = ctx.command_line;
  io::write_text(dir / "figure1.meta.json", summary.dump(2) + "\n");

  ctx.out << "figure1: panel A max gap " << io::format_double(summary["panel_a_max_gap"].get<double>())
          << ", panel C max gap " << io::format_double(summary["panel_c_max_gap"].get<double>())
          << ", panel D max deviation (lambda >= 100) " << io::format_double(worst_large) << " -> " << f.out_dir
          << '\n';
  return kExitOk;
}

std::string join(const std::vector<std::string>& args) {
  std::string s;
  for (std::size_t i = 0; i < args.size(); ++i) s += (i ? " " : "") + args[i];
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic Bass model on networks: generation, exact and Monte Carlo curves, bound checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bassnet 1.0");

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a network file");
  gen_cmd->add_option("--family", gen.family.family, "complete|circle|grid|pairs|path|star|erdos_renyi|scale_free|small_world")
      ->required();
  gen_cmd->add_option("--M", gen.family.node_count, "Node count");
  gen_cmd->add_option("--p", gen.family.p, "External rate p")->capture_default_str();
  gen_cmd->add_option("--q", gen.family.q, "Internal rate q")->capture_default_str();
  gen_cmd->add_option("--sides", gen.sides, "Circle: 1 (left neighbor) or 2")->capture_default_str();
  gen_cmd->add_option("--D", gen.family.dimension, "Grid dimension")->capture_default_str();
  gen_cmd->add_option("--side", gen.family.side, "Grid side length");
  gen_cmd->add_option("--lambda", gen.family.mean_degree, "Erdos-Renyi mean degree")->capture_default_str();
  gen_cmd->add_option("--m-attach", gen.family.attach, "Scale-free attachment count")->capture_default_str();
  gen_cmd->add_option("--k", gen.family.neighbors, "Small-world ring degree")->capture_default_str();
  gen_cmd->add_option("--rewire", gen.family.rewire_prob, "Small-world rewiring probability")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Seed (default 42 or $BASSNET_SEED)");
  gen_cmd->add_option("-o,--output", gen.output, "Output network JSON")->required();

  SolveFlags exact;
  auto* exact_cmd = app.add_subcommand("exact", "Exact master-equation curve (M <= 20)");
  exact_cmd->add_option("--net", exact.net, "Network JSON")->required();
  exact_cmd->add_option("--t-max", exact.t_max, "Final time")->required();
  exact_cmd->add_option("--points", exact.points, "Grid points")->capture_default_str();
  exact_cmd->add_option("-o,--output", exact.output, "Output curve CSV")->required();

  SolveFlags mc;
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo adoption curve");
  mc_cmd->add_option("--net", mc.net, "Network JSON")->required();
  mc_cmd->add_option("--t-max", mc.t_max, "Final time")->required();
  mc_cmd->add_option("--points", mc.points, "Grid points")->capture_default_str();
  mc_cmd->add_option("--runs", mc.runs, "Trajectories")->capture_default_str();
  mc_cmd->add_option("--seed", mc.seed, "Base seed (default 42 or $BASSNET_SEED)");
  mc_cmd->add_option("--threads", mc.threads, "Worker threads (0 = all cores); never changes results");
  mc_cmd->add_flag("--per-node", mc.per_node, "Also write per-node columns");
  mc_cmd->add_option("-o,--output", mc.output, "Output curve CSV")->required();

  BoundsFlags bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Check a curve against the universal bounds");
  bounds_cmd->add_option("--curve", bounds.curve, "Curve CSV")->required();
  bounds_cmd->add_option("--net", bounds.net, "Network JSON (bounds from min/max p_j, q_j)");
  bounds_cmd->add_option("--p", bounds.p, "Override p");
  bounds_cmd->add_option("--q", bounds.q, "Override q");
  bounds_cmd->add_option("--max-violation-fraction", bounds.max_violation_fraction,
                         "Allowed fraction of flagged points (default 0 exact, 0.01 Monte Carlo)");
  bounds_cmd->add_option("-o,--output", bounds.output, "Report CSV");

  GapFlags gap;
  auto* gap_cmd = app.add_subcommand("gap", "Half-life ratio of the bounds versus q/p");
  gap_cmd->add_option("--p", gap.p, "External rate p")->capture_default_str();
  gap_cmd->add_option("--lambdas", gap.lambdas, "Comma-separated q/p values")->delimiter(',');
  gap_cmd->add_option("-o,--output", gap.output, "Output CSV (stdout when omitted)");

  ConjectureFlags conj;
  auto* conj_cmd = app.add_subcommand("conjecture", "Compare random homogeneous networks with the complete network");
  conj_cmd->add_option("--M", conj.m, "Node count")->capture_default_str();
  conj_cmd->add_option("--p", conj.p, "External rate p")->capture_default_str();
  conj_cmd->add_option("--q", conj.q, "Internal rate q")->capture_default_str();
  conj_cmd->add_option("--samples", conj.samples, "Random networks")->capture_default_str();
  conj_cmd->add_option("--t-max", conj.t_max, "Final time (default 10/(p+q) + 5/p)");
  conj_cmd->add_option("--points", conj.points, "Grid points")->capture_default_str();
  conj_cmd->add_option("--seed", conj.seed, "Seed (default 42 or $BASSNET_SEED)");
  conj_cmd->add_option("--threads", conj.threads, "Worker threads (0 = all cores)");
  conj_cmd->add_option("-o,--output", conj.output, "Per-sample CSV");

  FigureFlags fig;
  auto* fig_cmd = app.add_subcommand("figure1", "Bounds and half-life ratio panels as SVG + CSV");
  fig_cmd->add_option("--out-dir", fig.out_dir, "Output directory")->capture_default_str();
  fig_cmd->add_option("--p", fig.p, "External rate p")->capture_default_str();
  fig_cmd->add_option("--points", fig.points, "Points per curve panel")->capture_default_str();
  fig_cmd->add_option("--lambda-points", fig.lambda_points, "Points on the ratio panel")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const Context ctx{join(args), out, err};
  try {
    if (*gen_cmd) return cmd_gen(gen, ctx);
    if (*exact_cmd) return cmd_exact(exact, ctx);
    if (*mc_cmd) return cmd_mc(mc, ctx);
    if (*bounds_cmd) return cmd_bounds(bounds, ctx);
    if (*gap_cmd) return cmd_gap(gap, ctx);
    if (*conj_cmd) return cmd_conjecture(conj, ctx);
    if (*fig_cmd) return cmd_figure1(fig, ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const io::IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const io::FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace bassnet::cli
