#pragma once

#include <string>
#include <vector>

namespace cho {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // NaN marks a missing point
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;  // non-positive values are dropped on a log axis
  std::vector<Series> series;
};

/// Standalone SVG line chart with axes, ticks and a legend.
std::string render_svg(const Plot& plot);

}  // namespace cho
