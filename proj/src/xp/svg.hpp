#pragma once

#include <string>
#include <vector>

namespace hdd::xp {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> band;  // half-width of a shaded band around y; empty for none
  std::string color = "#1f77b4";
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<std::pair<double, std::string>> markers;  // dashed vertical lines
};

/// Static SVG line plot. Non-finite points, and non-positive ones on a log
/// axis, are skipped.
std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace hdd::xp
