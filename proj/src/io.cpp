#include "bassnet/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

#include <json.hpp>

namespace bassnet::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw FormatError("network schema violation at " + path + ": " + what);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && s[b] == ' ') ++b;
  return s.substr(b);
}

double parse_double(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw FormatError("invalid number '" + t + "' at " + where);
  return v;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string network_to_json(const NetworkSpec& net) {
  const Eigen::VectorXd& p = net.external_rates();
  const bool scalar_p = p.size() > 0 && (p.array() == p(0)).all();
  std::ostringstream os;
  os << "{\"M\": " << net.node_count() << ", \"p\": ";
  if (scalar_p) {
    os << format_double(p(0));
  } else {
    os << '[';
    for (Eigen::Index j = 0; j < p.size(); ++j) os << (j ? ", " : "") << format_double(p(j));
    os << ']';
  }
  os << ",\n \"edges\": [";
  const auto edges = net.edges();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    os << (i ? ",\n  " : "\n  ") << '[' << edges[i].source << ", " << edges[i].target << ", "
       << format_double(edges[i].weight) << ']';
  }
  os << (edges.empty() ? "]" : "\n ]") << ",\n \"meta\": " << json(net.metadata()).dump() << "}\n";
  return os.str();
}

NetworkSpec network_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed network JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("/", "expected an object");
  for (const char* key : {"M", "p", "edges"}) {
    if (!doc.contains(key)) schema_error(std::string("/") + key, "missing field");
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "M" && key != "p" && key != "edges" && key != "meta") schema_error("/" + key, "unknown field");
  }
  const json& jm = doc["M"];
  if (!jm.is_number_integer() || jm.get<long long>() < 1) schema_error("/M", "expected a positive integer");
  const long long m_ll = jm.get<long long>();
  if (m_ll > (1 << 26)) schema_error("/M", "node count too large");
  const int m = static_cast<int>(m_ll);

  Eigen::VectorXd rates(m);
  const json& jp = doc["p"];
  if (jp.is_number()) {
    rates.setConstant(jp.get<double>());
  } else if (jp.is_array()) {
    if (static_cast<int>(jp.size()) != m) schema_error("/p", "expected " + std::to_string(m) + " entries");
    for (int j = 0; j < m; ++j) {
      if (!jp[j].is_number()) schema_error("/p/" + std::to_string(j), "expected a number");
      rates(j) = jp[j].get<double>();
    }
  } else {
    schema_error("/p", "expected a number or an array of numbers");
  }
  for (int j = 0; j < m; ++j) {
    if (!(rates(j) > 0.0) || !std::isfinite(rates(j))) {
      schema_error(jp.is_array() ? "/p/" + std::to_string(j) : "/p", "external rate must be positive");
    }
  }

  const json& je = doc["edges"];
  if (!je.is_array()) schema_error("/edges", "expected an array");
  NetworkBuilder builder(rates);
  std::set<std::pair<int, int>> seen;
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string at = "/edges/" + std::to_string(i);
    const json& e = je[i];
    if (!e.is_array() || e.size() != 3) schema_error(at, "expected [source, target, weight]");
    if (!e[0].is_number_integer()) schema_error(at + "/0", "expected an integer node id");
    if (!e[1].is_number_integer()) schema_error(at + "/1", "expected an integer node id");
    if (!e[2].is_number()) schema_error(at + "/2", "expected a number");
    const long long k = e[0].get<long long>();
    const long long j = e[1].get<long long>();
    const double w = e[2].get<double>();
    if (k < 0 || k >= m) schema_error(at + "/0", "node id out of range");
    if (j < 0 || j >= m) schema_error(at + "/1", "node id out of range");
    if (k == j) schema_error(at, "self-loop at node " + std::to_string(j));
    if (!(w > 0.0) || !std::isfinite(w)) schema_error(at + "/2", "weight must be positive");
    if (!seen.emplace(static_cast<int>(k), static_cast<int>(j)).second) {
      schema_error(at, "duplicate edge (" + std::to_string(k) + ", " + std::to_string(j) + ")");
    }
    builder.add_edge(static_cast<int>(k), static_cast<int>(j), w);
  }
  std::string meta;
  if (doc.contains("meta")) {
    if (!doc["meta"].is_string()) schema_error("/meta", "expected a string");
    meta = doc["meta"].get<std::string>();
  }
  return builder.build(std::move(meta));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  os.flush();
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_network(const std::filesystem::path& path, const NetworkSpec& net) {
  if (const auto violations = validate(net, /*allow_isolated=*/true); !violations.empty()) {
    throw std::invalid_argument("refusing to write invalid network: " + violations.front().message);
  }
  write_text(path, network_to_json(net));
}

NetworkSpec read_network(const std::filesystem::path& path) { return network_from_json(read_text(path)); }

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path out = path;
  out.replace_filename(path.stem().string() + ".meta.json");
  return out;
}

std::string curve_to_csv(const AdoptionCurve& curve, const BassParams& lower, const BassParams& upper) {
  const Eigen::Index g = curve.size();
  const bool nodes = curve.has_nodes();
  std::string out = "t,f,se,lower,upper";
  if (nodes) {
    for (Eigen::Index j = 0; j < curve.node.cols(); ++j) out += ",f_" + std::to_string(j);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < g; ++i) {
    const double t = curve.times(i);
    out += format_double(t);
    out += ',' + format_double(curve.mean(i));
    out += ',';
    if (curve.has_std_error()) out += format_double(curve.std_error(i));
    out += ',' + format_double(f_two_node(t, lower));
    out += ',' + format_double(f_bass(t, upper));
    if (nodes) {
      for (Eigen::Index j = 0; j < curve.node.cols(); ++j) out += ',' + format_double(curve.node(i, j));
    }
    out += '\n';
  }
  return out;
}

CurveFile curve_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw FormatError("curve file is empty");
  const auto header = split(trim(line), ',');
  const std::vector<std::string> required = {"t", "f", "se", "lower", "upper"};
  for (std::size_t c = 0; c < required.size(); ++c) {
    if (std::find(header.begin(), header.end(), required[c]) == header.end()) {
      throw FormatError("curve file is missing column '" + required[c] + "'");
    }
    if (c >= header.size() || header[c] != required[c]) {
      throw FormatError("curve column " + std::to_string(c) + " must be '" + required[c] + "'");
    }
  }
  for (std::size_t c = required.size(); c < header.size(); ++c) {
    if (header[c] != "f_" + std::to_string(c - required.size())) {
      throw FormatError("unexpected curve column '" + header[c] + "'");
    }
  }
  const std::size_t node_cols = header.size() - required.size();

  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    rows.push_back(split(line, ','));
    if (rows.back().size() != header.size()) {
      throw FormatError("row " + std::to_string(rows.size()) + " has " + std::to_string(rows.back().size()) +
                        " fields, expected " + std::to_string(header.size()));
    }
  }
  const auto g = static_cast<Eigen::Index>(rows.size());
  CurveFile file;
  AdoptionCurve& c = file.curve;
  c.times.resize(g);
  c.mean.resize(g);
  file.lower.resize(g);
  file.upper.resize(g);
  Eigen::VectorXd se(g);
  long se_present = 0;
  if (node_cols > 0) c.node.resize(g, static_cast<Eigen::Index>(node_cols));
  for (Eigen::Index i = 0; i < g; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    const std::string where = "row " + std::to_string(i + 1);
    c.times(i) = parse_double(r[0], where + ", column 't'");
    c.mean(i) = parse_double(r[1], where + ", column 'f'");
    if (!trim(r[2]).empty()) {
      se(i) = parse_double(r[2], where + ", column 'se'");
      ++se_present;
    }
    file.lower(i) = parse_double(r[3], where + ", column 'lower'");
    file.upper(i) = parse_double(r[4], where + ", column 'upper'");
    for (std::size_t j = 0; j < node_cols; ++j) {
      c.node(i, static_cast<Eigen::Index>(j)) = parse_double(r[5 + j], where + ", column '" + header[5 + j] + "'");
    }
    if (i > 0 && !(c.times(i) > c.times(i - 1))) throw FormatError("time column is not strictly increasing at " + where);
    auto require_fraction = [&](double v, const std::string& column) {
      if (!(v >= 0.0 && v <= 1.0)) throw FormatError(where + ", column '" + column + "': fraction outside [0, 1]");
    };
    require_fraction(c.mean(i), "f");
    require_fraction(file.lower(i), "lower");
    require_fraction(file.upper(i), "upper");
    for (std::size_t j = 0; j < node_cols; ++j) require_fraction(c.node(i, static_cast<Eigen::Index>(j)), header[5 + j]);
  }
  if (se_present == g && g > 0) {
    c.std_error = se;
    c.source = CurveSource::MonteCarlo;
  } else if (se_present != 0) {
    throw FormatError("column 'se' is only partially populated");
  }
  c.node_count = static_cast<int>(node_cols);
  return file;
}

std::string meta_to_json(const CurveMeta& meta) {
  ordered_json j;
  j["p"] = meta.params ? json(meta.params->p) : json(nullptr);
  j["q"] = meta.params ? json(meta.params->q) : json(nullptr);
  j["M"] = meta.node_count;
  j["source"] = to_string(meta.source);
  j["seed"] = meta.seed;
  j["runs"] = meta.runs;
  j["command"] = meta.command;
  return j.dump(2) + "\n";
}

CurveMeta meta_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed metadata JSON: ") + e.what());
  }
  CurveMeta meta;
  try {
    if (j.contains("p") && j.contains("q") && j["p"].is_number() && j["q"].is_number()) {
      meta.params = BassParams(j["p"].get<double>(), j["q"].get<double>());
    }
    meta.node_count = j.value("M", 0);
    meta.source = curve_source_from_string(j.value("source", std::string("exact")));
    meta.seed = j.value("seed", std::uint64_t{0});
    meta.runs = j.value("runs", 0L);
    meta.command = j.value("command", std::string());
  } catch (const std::exception& e) {
    throw FormatError(std::string("invalid metadata: ") + e.what());
  }
  return meta;
}

void write_curve(const std::filesystem::path& path, const AdoptionCurve& curve, const BassParams& lower,
                 const BassParams& upper, const std::string& command) {
  write_text(path, curve_to_csv(curve, lower, upper));
  CurveMeta meta;
  meta.params = curve.params;
  meta.node_count = curve.node_count;
  meta.source = curve.source;
  meta.seed = curve.seed;
  meta.runs = curve.runs;
  meta.command = command;
  write_text(sidecar_path(path), meta_to_json(meta));
}

CurveFile read_curve(const std::filesystem::path& path) {
  CurveFile file = curve_from_csv(read_text(path));
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    const CurveMeta meta = meta_from_json(read_text(side));
    file.curve.params = meta.params;
    file.curve.source = meta.source;
    file.curve.seed = meta.seed;
    file.curve.runs = meta.runs;
    if (meta.node_count > 0) file.curve.node_count = meta.node_count;
  }
  return file;
}

std::string report_to_csv(const BoundsReport& r) {
  std::string out = "t,observed,lower,upper,margin_low,margin_high,slack,violation_low,violation_high\n";
  for (Eigen::Index i = 0; i < r.times.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out += format_double(r.times(i)) + ',' + format_double(r.observed(i)) + ',' + format_double(r.lower(i)) + ',' +
           format_double(r.upper(i)) + ',' + format_double(r.margin_low(i)) + ',' + format_double(r.margin_high(i)) +
           ',' + format_double(r.slack(i)) + ',' + (r.violation_low[k] ? "1" : "0") + ',' +
           (r.violation_high[k] ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace bassnet::io
