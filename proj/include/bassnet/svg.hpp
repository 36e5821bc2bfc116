#pragma once

#include <string>
#include <utility>
#include <vector>

namespace bassnet::svg {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
  bool dashed = false;
};

/// Filled region between two curves sharing the same x values.
struct Band {
  std::vector<double> x;
  std::vector<double> lower;
  std::vector<double> upper;
  std::string fill = "#cccccc";
};

/// Minimal static line plot: polylines, a shaded band, axis ticks and a legend.
class LinePlot {
 public:
  LinePlot(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  LinePlot& add(Series s) {
    series_.push_back(std::move(s));
    return *this;
  }
  LinePlot& add(Band b) {
    bands_.push_back(std::move(b));
    return *this;
  }
  LinePlot& log_x(bool on = true) {
    log_x_ = on;
    return *this;
  }
  LinePlot& y_range(double lo, double hi) {
    y_lo_ = lo;
    y_hi_ = hi;
    fixed_y_ = true;
    return *this;
  }

  std::string render(int width = 640, int height = 440) const;

 private:
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  std::vector<Band> bands_;
  bool log_x_ = false;
  bool fixed_y_ = false;
  double y_lo_ = 0.0, y_hi_ = 1.0;
};

}  // namespace bassnet::svg
