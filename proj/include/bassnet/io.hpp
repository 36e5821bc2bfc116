#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "bassnet/bounds.hpp"
#include "bassnet/curve.hpp"
#include "bassnet/network.hpp"

namespace bassnet::io {

/// Malformed input file. The message names the offending JSON path or CSV column.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `%.17g`; round-trips every finite double.
std::string format_double(double value);

// Networks: {"M": int, "p": float | [float], "edges": [[k, j, w], ...], "meta": string}

std::string network_to_json(const NetworkSpec& net);
NetworkSpec network_from_json(const std::string& text);
void write_network(const std::filesystem::path& path, const NetworkSpec& net);
NetworkSpec read_network(const std::filesystem::path& path);

// Curves: CSV with header t,f,se,lower,upper[,f_0,...,f_{M-1}] plus a
// <stem>.meta.json sidecar.

struct CurveMeta {
  std::optional<BassParams> params;
  int node_count = 0;
  CurveSource source = CurveSource::Exact;
  std::uint64_t seed = 0;
  long runs = 0;
  std::string command;  // command line that produced the file, if any
};

struct CurveFile {
  AdoptionCurve curve;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Path of the metadata sidecar belonging to `path` (same stem, `.meta.json`).
std::filesystem::path sidecar_path(const std::filesystem::path& path);

std::string curve_to_csv(const AdoptionCurve& curve, const BassParams& lower, const BassParams& upper);
CurveFile curve_from_csv(const std::string& text);

/// Writes the CSV and its sidecar. Lower/upper columns come from the two-node
/// curve at `lower` and the Bass curve at `upper`.
void write_curve(const std::filesystem::path& path, const AdoptionCurve& curve, const BassParams& lower,
                 const BassParams& upper, const std::string& command = {});
/// Reads the CSV and, when present, its sidecar (which fills params, source,
/// seed and runs).
CurveFile read_curve(const std::filesystem::path& path);

std::string meta_to_json(const CurveMeta& meta);
CurveMeta meta_from_json(const std::string& text);

/// Report CSV: t,observed,lower,upper,margin_low,margin_high,slack,violation_low,violation_high
std::string report_to_csv(const BoundsReport& report);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace bassnet::io
