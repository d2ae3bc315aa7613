#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "wordmask/io.hpp"
#include "wordmask/metrics.hpp"

namespace wordmask {

// Minimal SVG line plot for one or more labelled curves on a shared grid.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

inline std::string render_svg_plot(const std::vector<SvgSeries>& series,
                                   const std::string& title,
                                   const std::string& x_label = "WER%",
                                   const std::string& y_label = "density") {
  const int width = 720, height = 440;
  const int ml = 60, mr = 150, mt = 40, mb = 50;
  const double plot_w = width - ml - mr, plot_h = height - mt - mb;

  double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
  for (const auto& s : series) {
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) ymax = std::max(ymax, v);
  }
  if (!(xmax > xmin)) { xmin = 0.0; xmax = 1.0; }
  if (!(ymax > ymin)) ymax = 1.0;
  ymax *= 1.05;

  auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * plot_w;
  };
  auto py = [&](double y) {
    return mt + plot_h - (y - ymin) / (ymax - ymin) * plot_h;
  };

  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                  "#bcbd22"};

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";

  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + plot_h << "\" x2=\""
      << ml + plot_w << "\" y2=\"" << mt + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << mt + plot_h << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double xv = xmin + (xmax - xmin) * i / 5.0;
    double yv = ymin + (ymax - ymin) * i / 5.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << mt + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << format_double(xv, 2) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << format_double(yv, 3) << "</text>\n";
  }
  out << "<text x=\"" << ml + plot_w / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << mt + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\" transform=\"rotate(-90 16 " << mt + plot_h / 2
      << ")\">" << y_label << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& sr = series[s];
    const char* color = palette[s % (sizeof palette / sizeof *palette)];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i)
      out << format_double(px(sr.x[i]), 2) << ","
          << format_double(py(sr.y[i]), 2) << " ";
    out << "\"/>\n";
    double ly = mt + 14.0 * (s + 1);
    out << "<line x1=\"" << ml + plot_w + 10 << "\" y1=\"" << ly - 4
        << "\" x2=\"" << ml + plot_w + 34 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << ml + plot_w + 40 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << sr.label
        << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline std::string kde_curve_csv(const KdeCurve& curve) {
  std::string out = "wer,density\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i)
    out += format_double(curve.grid[i], 8) + "," +
           format_double(curve.density[i], 8) + "\n";
  return out;
}

}  // namespace wordmask
