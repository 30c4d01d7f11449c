#pragma once

#include <filesystem>
#include <string>

#include "tsc/config.hpp"

namespace tsc::harness {

// Pixel mapping used by the SVG writer, exposed so consumers (and tests) can
// reproduce exact point coordinates from metric values.
struct PlotGeometry {
  double width = 880.0;
  double height = 560.0;
  double margin_left = 60.0;
  double margin_right = 190.0;
  double margin_top = 20.0;
  double margin_bottom = 45.0;
  double x_min = 0.0, x_max = 1.0;  // step range
  double y_min = 0.0, y_max = 1.0;  // accuracy / threshold range

  double px_x(double x) const;
  double px_y(double y) const;
};

PlotGeometry plot_geometry(const RunResult& result);

// Coordinate formatting used inside the SVG (two decimals).
std::string format_px(double v);

// Renders the pseudo-label accuracy curves, the teacher/student target
// accuracy curves, and the threshold schedule into one SVG file. With an
// empty history this warns on stderr and writes nothing.
void emit_plots(const RunResult& result, const std::filesystem::path& path);

}  // namespace tsc::harness
