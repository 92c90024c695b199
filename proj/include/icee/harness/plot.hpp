#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "icee/common.hpp"

namespace icee::harness {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::vector<double> lo, hi;  // optional CI band, same length as x
};

// Self-contained SVG line plot with optional confidence bands and a legend.
inline void write_line_plot(const std::string& path, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel,
                            const std::vector<Series>& series) {
  if (series.empty()) throw SchemaError("nothing to plot");
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
  const double W = 640, H = 440, ml = 70, mr = 20, mt = 40, mb = 55;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
    for (double v : s.lo) ymin = std::min(ymin, v);
    for (double v : s.hi) ymax = std::max(ymax, v);
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto px = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open figure for writing: " + path);
  out.precision(6);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' font-family='sans-serif' font-size='12'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='15'>" << title
      << "</text>\n";
  // axes
  out << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
      << "' stroke='black'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    out << "<text x='" << px(xv) << "' y='" << H - mb + 18
        << "' text-anchor='middle'>" << float(xv) << "</text>\n";
    out << "<line x1='" << px(xv) << "' y1='" << H - mb << "' x2='" << px(xv) << "' y2='"
        << H - mb + 4 << "' stroke='black'/>\n";
    out << "<text x='" << ml - 8 << "' y='" << py(yv) + 4
        << "' text-anchor='end'>" << float(yv) << "</text>\n";
    out << "<line x1='" << ml - 4 << "' y1='" << py(yv) << "' x2='" << ml << "' y2='"
        << py(yv) << "' stroke='black'/>\n";
  }
  out << "<text x='" << W / 2 << "' y='" << H - 12 << "' text-anchor='middle'>" << xlabel
      << "</text>\n";
  out << "<text x='18' y='" << H / 2
      << "' text-anchor='middle' transform='rotate(-90 18 " << H / 2 << ")'>" << ylabel
      << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = palette[si % 8];
    if (s.lo.size() == s.x.size() && !s.lo.empty()) {
      out << "<polygon fill='" << color << "' opacity='0.18' points='";
      for (size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << "," << py(s.hi[i]) << " ";
      for (size_t i = s.x.size(); i-- > 0;) out << px(s.x[i]) << "," << py(s.lo[i]) << " ";
      out << "'/>\n";
    }
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.8' points='";
    for (size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << "," << py(s.y[i]) << " ";
    out << "'/>\n";
    // legend
    const double ly = mt + 16 * double(si);
    out << "<line x1='" << W - mr - 130 << "' y1='" << ly << "' x2='" << W - mr - 110
        << "' y2='" << ly << "' stroke='" << color << "' stroke-width='2'/>\n";
    out << "<text x='" << W - mr - 104 << "' y='" << ly + 4 << "'>" << s.label
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("failed writing figure: " + path);
}

}  // namespace icee::harness
