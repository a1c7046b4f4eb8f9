#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace roadpf {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y), drawn in the given order
};

/// Standalone SVG line chart: axes with min/max tick labels, one <polyline>
/// per series and a legend.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           std::span<const PlotSeries> series);

}  // namespace roadpf
