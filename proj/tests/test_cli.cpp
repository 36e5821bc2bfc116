#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "../tools/commands.hpp"
#include "bassnet/io.hpp"

using namespace bassnet;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "bassnet");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("bassnet_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("gen") {
  TempDir dir;
  auto r = invoke({"gen", "--family", "complete", "--M", "100", "--p", "0.01", "--q", "0.1", "-o", dir / "c.json"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("edges=9900") != std::string::npos);
  const auto net = io::read_network(dir / "c.json");
  CHECK(net.edge_count() == 9900);
  CHECK(net.incoming(0).front().weight == doctest::Approx(0.1 / 99));
  CHECK(fs::exists(dir / "c.meta.json"));

  r = invoke({"gen", "--family", "pairs", "--M", "7", "-o", dir / "p.json"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("M must be even") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "p.json"));

  r = invoke({"gen", "--family", "grid", "--D", "2", "--side", "10", "--p", "0.01", "--q", "0.1", "-o", dir / "g.json"});
  REQUIRE(r.code == cli::kExitOk);
  const auto grid = io::read_network(dir / "g.json");
  CHECK(grid.node_count() == 100);
  for (int j = 0; j < 100; ++j) CHECK(in_weight(grid, j) == doctest::Approx(0.1).epsilon(1e-15));

  CHECK(invoke({"gen", "--family", "complete", "--M", "5", "--bogus", "1", "-o", dir / "x.json"}).code == cli::kExitUsage);
  CHECK(invoke({"gen", "--family", "complete", "--M", "5", "--p", "-1", "-o", dir / "x.json"}).code == cli::kExitUsage);
  CHECK(invoke({"gen", "--family", "complete", "--M", "5", "-o", "/nonexistent/dir/x.json"}).code == cli::kExitIo);
}

TEST_CASE("seed defaults and environment override") {
  TempDir dir;
  const std::vector<std::string> base{"gen", "--family", "erdos_renyi", "--M", "60", "--lambda", "3"};
  auto with = [&](std::vector<std::string> extra, const std::string& out) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    args.push_back("-o");
    args.push_back(dir / out);
    REQUIRE(invoke(args).code == cli::kExitOk);
    return io::read_network(dir / out).edges();
  };
  CHECK(with({}, "a.json") == with({"--seed", "42"}, "b.json"));
  ::setenv("BASSNET_SEED", "7", 1);
  const auto env = with({}, "c.json");
  ::unsetenv("BASSNET_SEED");
  CHECK(env == with({"--seed", "7"}, "d.json"));
  CHECK(env != with({}, "e.json"));
}

TEST_CASE("exact then bounds on the two-node network") {
  TempDir dir;
  REQUIRE(invoke({"gen", "--family", "pairs", "--M", "2", "--p", "0.01", "--q", "0.1", "-o", dir / "two.json"}).code == 0);
  auto r = invoke({"exact", "--net", dir / "two.json", "--t-max", "400", "--points", "200", "-o", dir / "two.csv"});
  REQUIRE(r.code == cli::kExitOk);
  const auto file = io::read_curve(dir / "two.csv");
  CHECK(file.curve.size() == 200);
  CHECK(file.curve.has_nodes());

  const auto meta = nlohmann::json::parse(io::read_text(dir / "two.meta.json"));
  CHECK(meta["source"] == "exact");
  CHECK(meta["command"].get<std::string>().find("exact --net") != std::string::npos);

  r = invoke({"bounds", "--curve", dir / "two.csv", "-o", dir / "report.csv"});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out.find("violations=0") != std::string::npos);
  CHECK(fs::exists(dir / "report.csv"));

  // A curve above the Bass curve fails with the check exit code.
  std::string csv = "t,f,se,lower,upper\n0,0,,0,0\n50,0.99,,0.3,0.4\n";
  io::write_text(dir / "bad.csv", csv);
  r = invoke({"bounds", "--curve", dir / "bad.csv", "--p", "0.01", "--q", "0.1"});
  CHECK(r.code == cli::kExitCheckFailed);

  CHECK(invoke({"bounds", "--curve", dir / "missing.csv"}).code == cli::kExitIo);
}

TEST_CASE("exact refuses large networks") {
  TempDir dir;
  REQUIRE(invoke({"gen", "--family", "circle", "--M", "21", "-o", dir / "c.json"}).code == 0);
  const auto r = invoke({"exact", "--net", dir / "c.json", "--t-max", "10", "-o", dir / "c.csv"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("mc") != std::string::npos);
}

TEST_CASE("mc output is reproducible across runs and thread counts") {
  TempDir dir;
  REQUIRE(invoke({"gen", "--family", "circle", "--M", "400", "-o", dir / "c.json"}).code == 0);
  auto mc = [&](const std::string& threads, const std::string& out) {
    const auto r = invoke({"mc", "--net", dir / "c.json", "--t-max", "100", "--points", "21", "--runs", "300", "--seed",
                        "7", "--threads", threads, "-o", dir / out});
    REQUIRE(r.code == cli::kExitOk);
    return io::read_text(dir / out);
  };
  const auto a = mc("1", "a.csv");
  CHECK(a == mc("1", "b.csv"));
  CHECK(a == mc("4", "c.csv"));
  const auto file = io::read_curve(dir / "a.csv");
  CHECK(file.curve.has_std_error());
  CHECK(file.curve.runs == 300);
  CHECK(invoke({"bounds", "--curve", dir / "a.csv"}).code == cli::kExitOk);
}

TEST_CASE("gap") {
  const auto r = invoke({"gap", "--p", "0.01", "--lambdas", "0.1,10,100"});
  REQUIRE(r.code == cli::kExitOk);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("lambda,p,q,t_half_lower,t_half_upper,ratio", 0) == 0);
  std::vector<double> ratios;
  while (std::getline(is, line)) {
    std::vector<std::string> fields;
    std::stringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    ratios.push_back(std::stod(fields.at(5)));
  }
  REQUIRE(ratios.size() == 3);
  CHECK(ratios[0] > ratios[1]);
  CHECK(ratios[1] > ratios[2]);
  CHECK(std::abs(ratios[2] - 0.1302) < 5e-4);
  CHECK(invoke({"gap", "--p", "0", "--lambdas", "1"}).code == cli::kExitUsage);
}

TEST_CASE("conjecture") {
  TempDir dir;
  const auto r = invoke({"conjecture", "--M", "4", "--samples", "20", "--points", "21", "-o", dir / "conj.csv"});
  CHECK(r.code == cli::kExitOk);
  CHECK(fs::exists(dir / "conj.csv"));
  CHECK(fs::exists(dir / "conj.meta.json"));
}

TEST_CASE("figure1") {
  TempDir dir;
  const auto r = invoke({"figure1", "--out-dir", dir / "fig"});
  REQUIRE(r.code == cli::kExitOk);
  for (const char* panel : {"a", "b", "c", "d"}) {
    CHECK(fs::exists(dir.path / "fig" / (std::string("panel_") + panel + ".svg")));
    CHECK(fs::exists(dir.path / "fig" / (std::string("panel_") + panel + ".csv")));
  }
  const auto svg = io::read_text(dir.path / "fig" / "panel_c.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<polygon") != std::string::npos);
  const auto meta = nlohmann::json::parse(io::read_text(dir.path / "fig" / "figure1.meta.json"));
  CHECK(meta["panel_a_max_gap"].get<double>() < 0.01);
  CHECK(meta["panel_c_max_gap"].get<double>() > 0.4);
}

TEST_CASE("usage errors") {
  CHECK(invoke({}).code == cli::kExitUsage);
  CHECK(invoke({"frobnicate"}).code == cli::kExitUsage);
  CHECK(invoke({"--help"}).code == cli::kExitOk);
}
