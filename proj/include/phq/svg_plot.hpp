#pragma once

#include <string>
#include <vector>

namespace phq {

struct PlotSeries {
  std::string label;
  std::vector<double> y;
};

/// Static line plot with linear axes, one polyline per series. Non-finite
/// samples are skipped.
std::string render_svg(const std::string &title, const std::string &xlabel, const std::vector<double> &x,
                       const std::vector<PlotSeries> &series, int width = 640, int height = 400);

} // namespace phq
