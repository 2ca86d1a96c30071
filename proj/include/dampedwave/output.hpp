#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "dampedwave/timestepper.hpp"

namespace dampedwave {

/// Scientific notation with six significant digits.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

struct Table {
  std::vector<std::string> notes;  ///< extra '#' lines after the config header
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline void write_csv(std::ostream& os, const std::string& header, const Table& t) {
  os << header << '\n';
  for (const auto& n : t.notes) os << "# " << n << '\n';
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
}

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

/// Energy series thinned to at most ~1000 points.
inline PlotSeries plot_series(const std::string& label, const EnergySeries& e) {
  PlotSeries s{label, {}, {}};
  const std::size_t stride = std::max<std::size_t>(1, e.size() / 1000);
  for (std::size_t i = 0; i < e.size(); i += stride) {
    s.x.push_back(e.time(i));
    s.y.push_back(e.values[i]);
  }
  return s;
}

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

/// Polyline plot; non-positive values are skipped on a log axis.
inline void write_svg(std::ostream& os, const Plot& p) {
  const double w = 720, h = 440, left = 80, right = 180, top = 40, bottom = 50;
  const double pw = w - left - right;
  const double ph = h - top - bottom;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  auto ty = [&](double y) { return p.log_y ? std::log10(y) : y; };
  for (const auto& s : p.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (p.log_y && !(s.y[i] > 0.0)) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  }
  if (!(xmax > xmin)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymax > ymin)) { ymin -= 0.5; ymax += 0.5; }
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - ymin) / (ymax - ymin)) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << detail::svg_escape(p.title) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    const double label_y = p.log_y ? std::pow(10.0, fy) : fy;
    os << "<text x=\"" << left + pw * i / 4.0 << "\" y=\"" << top + ph + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
       << detail::short_number(fx) << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << top + ph * (1.0 - i / 4.0) + 4
       << "\" font-size=\"11\" text-anchor=\"end\">" << detail::short_number(label_y) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 10 << "\" font-size=\"12\" text-anchor=\"middle\">"
     << detail::svg_escape(p.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << top + ph / 2
     << ")\" text-anchor=\"middle\">" << detail::svg_escape(p.y_label) << "</text>\n";
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    const char* color = colors[k % 8];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (p.log_y && !(s.y[i] > 0.0)) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << detail::short_number(px(s.x[i])) << ',' << detail::short_number(py(s.y[i])) << ' ';
    }
    os << "\"/>\n";
    const double ly = top + 14 + 16 * static_cast<double>(k);
    os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly - 4
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 34 << "\" y=\"" << ly << "\" font-size=\"11\">" << detail::svg_escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace dampedwave
