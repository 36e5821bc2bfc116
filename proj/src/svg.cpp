#include "bassnet/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bassnet::svg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

// Roughly five "nice" ticks covering [lo, hi].
std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return ticks;
}

}  // namespace

std::string LinePlot::render(int width, int height) const {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  auto extend = [&](const std::vector<double>& xs, const std::vector<double>& ys) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
      if (log_x_ && !(xs[i] > 0.0)) continue;
      x_lo = std::min(x_lo, xs[i]);
      x_hi = std::max(x_hi, xs[i]);
      y_lo = std::min(y_lo, ys[i]);
      y_hi = std::max(y_hi, ys[i]);
    }
  };
  for (const auto& s : series_) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series x and y differ in length");
    extend(s.x, s.y);
  }
  for (const auto& b : bands_) {
    extend(b.x, b.lower);
    extend(b.x, b.upper);
  }
  if (!(x_hi > x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (fixed_y_) {
    y_lo = y_lo_;
    y_hi = y_hi_;
  } else if (!(y_hi > y_lo)) {
    y_lo = 0.0;
    y_hi = 1.0;
  }

  const double left = 70, right = 20, top = 40, bottom = 55;
  const double pw = width - left - right;
  const double ph = height - top - bottom;
  auto fx = [&](double x) {
    const double u = log_x_ ? (std::log10(x) - std::log10(x_lo)) / (std::log10(x_hi) - std::log10(x_lo))
                            : (x - x_lo) / (x_hi - x_lo);
    return left + u * pw;
  };
  auto fy = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title_)
     << "</text>\n";

  for (const auto& b : bands_) {
    os << "<polygon fill=\"" << b.fill << "\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < b.x.size(); ++i) os << num(fx(b.x[i])) << ',' << num(fy(b.upper[i])) << ' ';
    for (std::size_t i = b.x.size(); i-- > 0;) os << num(fx(b.x[i])) << ',' << num(fy(b.lower[i])) << ' ';
    os << "\"/>\n";
  }

  // Axes and ticks.
  os << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\"/></g>\n";
  std::vector<double> xt;
  if (log_x_) {
    for (double d = std::ceil(std::log10(x_lo) - 1e-9); d <= std::log10(x_hi) + 1e-9; d += 1.0) xt.push_back(std::pow(10.0, d));
  } else {
    xt = linear_ticks(x_lo, x_hi);
  }
  for (double t : xt) {
    os << "<line x1=\"" << num(fx(t)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(fx(t)) << "\" y2=\""
       << num(top + ph + 5) << "\" stroke=\"black\"/><text x=\"" << num(fx(t)) << "\" y=\"" << num(top + ph + 18)
       << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : linear_ticks(y_lo, y_hi)) {
    os << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(fy(t)) << "\" x2=\"" << num(left) << "\" y2=\""
       << num(fy(t)) << "\" stroke=\"black\"/><text x=\"" << num(left - 8) << "\" y=\"" << num(fy(t) + 4)
       << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 12.0) << "\" text-anchor=\"middle\">"
     << escape(x_label_) << "</text>\n";
  os << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << num(top + ph / 2) << ")\">" << escape(y_label_) << "</text>\n";

  for (const auto& s : series_) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
    if (s.dashed) os << " stroke-dasharray=\"6,4\"";
    os << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (log_x_ && !(s.x[i] > 0.0))) continue;
      os << num(fx(s.x[i])) << ',' << num(fy(std::clamp(s.y[i], y_lo, y_hi))) << ' ';
    }
    os << "\"/>\n";
  }

  double ly = top + 16;
  for (const auto& s : series_) {
    if (s.label.empty()) continue;
    os << "<line x1=\"" << num(left + pw - 150) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(left + pw - 120)
       << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
       << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/><text x=\"" << num(left + pw - 114) << "\" y=\""
       << num(ly) << "\">" << escape(s.label) << "</text>\n";
    ly += 18;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace bassnet::svg
