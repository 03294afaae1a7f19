#pragma once

#include <string>
#include <vector>

namespace fiberlink::scenario {

struct Series {
  std::string label;
  std::string color;  // any SVG color
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

/// Minimal SVG line chart with linear axes and a legend.
std::string line_chart_svg(const std::vector<Series>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label);

}  // namespace fiberlink::scenario
