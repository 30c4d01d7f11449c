#include "tsc/plot.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

namespace tsc::harness {

double PlotGeometry::px_x(double x) const {
  const double span = x_max > x_min ? x_max - x_min : 1.0;
  return margin_left + (x - x_min) / span * (width - margin_left - margin_right);
}

double PlotGeometry::px_y(double y) const {
  const double span = y_max > y_min ? y_max - y_min : 1.0;
  return height - margin_bottom - (y - y_min) / span * (height - margin_top - margin_bottom);
}

PlotGeometry plot_geometry(const RunResult& result) {
  PlotGeometry g;
  g.x_min = 0.0;
  g.x_max = result.history.empty() ? 1.0 : std::max(1, result.history.back().step);
  return g;
}

std::string format_px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

namespace {

struct Series {
  const char* label;
  const char* color;
  double (*get)(const EvalRow&);
};

constexpr Series kSeries[] = {
    {"pl_teacher_acc", "#1f77b4", [](const EvalRow& r) { return r.pl_teacher_acc; }},
    {"pl_student_acc", "#d62728", [](const EvalRow& r) { return r.pl_student_acc; }},
    {"pl_winner_acc", "#ff7f0e", [](const EvalRow& r) { return r.pl_winner_acc; }},
    {"teacher_acc", "#2ca02c", [](const EvalRow& r) { return r.teacher_acc; }},
    {"student_acc", "#9467bd", [](const EvalRow& r) { return r.student_acc; }},
    {"threshold", "#7f7f7f", [](const EvalRow& r) { return r.threshold; }},
};

}  // namespace

void emit_plots(const RunResult& result, const std::filesystem::path& path) {
  if (result.history.empty()) {
    std::cerr << "emit_plots: empty history, nothing to plot\n";
    return;
  }
  const PlotGeometry g = plot_geometry(result);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << g.width << "\" height=\""
      << g.height << "\" viewBox=\"0 0 " << g.width << " " << g.height << "\">\n";
  svg << "  <rect width=\"" << g.width << "\" height=\"" << g.height << "\" fill=\"white\"/>\n";

  // axes
  const double x0 = g.px_x(g.x_min), x1 = g.px_x(g.x_max);
  const double y0 = g.px_y(g.y_min), y1 = g.px_y(g.y_max);
  svg << "  <line x1=\"" << format_px(x0) << "\" y1=\"" << format_px(y0) << "\" x2=\""
      << format_px(x1) << "\" y2=\"" << format_px(y0)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "  <line x1=\"" << format_px(x0) << "\" y1=\"" << format_px(y0) << "\" x2=\""
      << format_px(x0) << "\" y2=\"" << format_px(y1)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yt = g.y_min + (g.y_max - g.y_min) * i / 4.0;
    const double py = g.px_y(yt);
    svg << "  <line x1=\"" << format_px(x0 - 4) << "\" y1=\"" << format_px(py) << "\" x2=\""
        << format_px(x0) << "\" y2=\"" << format_px(py) << "\" stroke=\"black\"/>\n";
    svg << "  <text x=\"" << format_px(x0 - 8) << "\" y=\"" << format_px(py + 4)
        << "\" font-size=\"12\" text-anchor=\"end\">" << format_px(yt) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double xt = g.x_min + (g.x_max - g.x_min) * i / 5.0;
    const double px = g.px_x(xt);
    svg << "  <line x1=\"" << format_px(px) << "\" y1=\"" << format_px(y0) << "\" x2=\""
        << format_px(px) << "\" y2=\"" << format_px(y0 + 4) << "\" stroke=\"black\"/>\n";
    svg << "  <text x=\"" << format_px(px) << "\" y=\"" << format_px(y0 + 18)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << static_cast<long long>(xt)
        << "</text>\n";
  }
  svg << "  <text x=\"" << format_px((x0 + x1) / 2) << "\" y=\"" << format_px(g.height - 8)
      << "\" font-size=\"13\" text-anchor=\"middle\">step</text>\n";

  // curves
  int legend_slot = 0;
  for (const Series& s : kSeries) {
    std::vector<std::pair<double, double>> pts;
    for (const EvalRow& r : result.history) {
      const double v = s.get(r);
      if (std::isnan(v)) continue;
      pts.emplace_back(g.px_x(r.step), g.px_y(v));
    }
    if (pts.empty()) continue;
    if (pts.size() == 1) {
      svg << "  <circle cx=\"" << format_px(pts[0].first) << "\" cy=\""
          << format_px(pts[0].second) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
    } else {
      svg << "  <polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) svg << " ";
        svg << format_px(pts[i].first) << "," << format_px(pts[i].second);
      }
      svg << "\"/>\n";
    }
    const double lx = g.width - g.margin_right + 16;
    const double ly = g.margin_top + 16 + 20 * legend_slot;
    svg << "  <line x1=\"" << format_px(lx) << "\" y1=\"" << format_px(ly - 4) << "\" x2=\""
        << format_px(lx + 22) << "\" y2=\"" << format_px(ly - 4) << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    svg << "  <text x=\"" << format_px(lx + 28) << "\" y=\"" << format_px(ly)
        << "\" font-size=\"12\">" << s.label << "</text>\n";
    ++legend_slot;
  }
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plots: cannot open " + path.string());
  out << svg.str();
  if (!out) throw std::runtime_error("emit_plots: write failed for " + path.string());
}

}  // namespace tsc::harness
