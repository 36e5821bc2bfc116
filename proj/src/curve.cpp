#include "bassnet/curve.hpp"

#include <stdexcept>

namespace bassnet {

std::string to_string(CurveSource source) {
  switch (source) {
    case CurveSource::Exact:
      return "exact";
    case CurveSource::MonteCarlo:
      return "mc";
    case CurveSource::Formula:
      return "formula";
  }
  return "exact";
}

CurveSource curve_source_from_string(const std::string& name) {
  if (name == "exact") return CurveSource::Exact;
  if (name == "mc") return CurveSource::MonteCarlo;
  if (name == "formula") return CurveSource::Formula;
  throw std::invalid_argument("unknown curve source '" + name + "'");
}

Eigen::VectorXd uniform_grid(double t_max, int points) {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be positive");
  Eigen::VectorXd t(points);
  for (int i = 0; i < points; ++i) t(i) = t_max * i / (points - 1);
  return t;
}

}  // namespace bassnet
