#pragma once

#include <string>
#include <vector>

namespace strand {

// One polyline. Colour is a CSS colour; empty picks from a fixed palette by
// series index.
struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string colour;
};

// Axis ranges default to the data bounds (padded) when min >= max.
struct PlotSpec {
  std::string title;
  std::string x_label, y_label;
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  int width = 960, height = 600;
};

// Self-contained SVG line plot with axes, tick labels and a legend; output
// is deterministic for identical inputs and written atomically.
void write_svg_plot(const std::string& path, const PlotSpec& spec,
                    const std::vector<Series>& series);

}  // namespace strand
