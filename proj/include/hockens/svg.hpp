#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hockens/geometry.hpp"

namespace hockens::svg {

struct Series {
  std::string label;
  std::vector<Point2> points;
  std::string color = "#1f77b4";
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool equal_aspect = false;
  /// Free text placed in an XML comment (e.g. a generation timestamp); omit for byte-stable output.
  std::optional<std::string> stamp;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
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

inline void header(std::ostream& os, int w, int h, const PlotOptions& opt) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
     << ' ' << h << "\">\n";
  if (opt.stamp) os << "<!-- " << escape(*opt.stamp) << " -->\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << escape(opt.title) << "</text>\n";
}

// Viridis-like ramp, t in [0, 1].
inline std::string ramp(double t) {
  t = std::clamp(t, 0.0, 1.0);
  static const double stops[5][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  const double s = t * 4.0;
  const int i = std::min(3, static_cast<int>(s));
  const double f = s - i;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[i][0] + f * (stops[i + 1][0] - stops[i][0])),
                static_cast<int>(stops[i][1] + f * (stops[i + 1][1] - stops[i][1])),
                static_cast<int>(stops[i][2] + f * (stops[i + 1][2] - stops[i][2])));
  return buf;
}

}  // namespace detail

/// Line plot of one or more series with simple axes.
inline void line_plot(std::ostream& os, const std::vector<Series>& series, const PlotOptions& opt) {
  const int w = 720, h = 540, ml = 70, mr = 30, mt = 40, mb = 60;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  }
  if (!(x1 > x0)) { x0 -= 1; x1 += 1; }
  if (!(y1 > y0)) { y0 -= 1; y1 += 1; }
  double sx = (w - ml - mr) / (x1 - x0), sy = (h - mt - mb) / (y1 - y0);
  if (opt.equal_aspect) sx = sy = std::min(sx, sy);
  auto px = [&](double x) { return ml + (x - x0) * sx; };
  auto py = [&](double y) { return h - mb - (y - y0) * sy; };

  detail::header(os, w, h, opt);
  os << "<g stroke=\"#444\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb << "\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb << "\"/>\n";
  os << "</g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << detail::num(px(xv)) << "\" y=\"" << h - mb + 16 << "\" text-anchor=\"middle\">"
       << detail::num(xv) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << detail::num(py(yv) + 4) << "\" text-anchor=\"end\">" << detail::num(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 18 << "\" text-anchor=\"middle\">"
     << detail::escape(opt.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << (mt + h - mb) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << detail::escape(opt.y_label) << "</text>\n";
  os << "</g>\n";

  int row = 0;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    // Thin very long series so the file stays small.
    const std::size_t stride = std::max<std::size_t>(1, s.points.size() / 2000);
    for (std::size_t i = 0; i < s.points.size(); i += stride) {
      os << detail::num(px(s.points[i].x)) << ',' << detail::num(py(s.points[i].y)) << ' ';
    }
    if (!s.points.empty()) os << detail::num(px(s.points.back().x)) << ',' << detail::num(py(s.points.back().y));
    os << "\"/>\n";
    os << "<text x=\"" << w - mr - 160 << "\" y=\"" << mt + 14 + 16 * row << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
       << s.color << "\">" << detail::escape(s.label) << "</text>\n";
    ++row;
  }
  os << "</svg>\n";
}

/// Heatmap of a row-major grid (rows along y). Missing values are drawn grey.
inline void heatmap(std::ostream& os, const std::vector<double>& xs, const std::vector<double>& ys,
                    const std::vector<std::optional<double>>& values, const PlotOptions& opt,
                    const std::vector<Point2>& markers = {}) {
  const int w = 760, h = 620, ml = 70, mr = 110, mt = 40, mb = 60;
  double v0 = 1e300, v1 = -1e300;
  for (const auto& v : values) {
    if (v) {
      v0 = std::min(v0, *v);
      v1 = std::max(v1, *v);
    }
  }
  if (!(v1 > v0)) { v0 -= 1; v1 += 1; }
  const double x0 = xs.front(), x1 = xs.size() > 1 ? xs.back() : xs.front() + 1;
  const double y0 = ys.front(), y1 = ys.size() > 1 ? ys.back() : ys.front() + 1;
  const double cw = double(w - ml - mr) / xs.size(), ch = double(h - mt - mb) / ys.size();
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr - cw) + cw / 2; };
  auto py = [&](double y) { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb - ch) - ch / 2; };

  detail::header(os, w, h, opt);
  os << "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t j = 0; j < ys.size(); ++j) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto& v = values[j * xs.size() + i];
      const std::string fill = v ? detail::ramp((*v - v0) / (v1 - v0)) : std::string("#d9d9d9");
      os << "<rect x=\"" << detail::num(ml + i * cw) << "\" y=\"" << detail::num(h - mb - (j + 1) * ch) << "\" width=\""
         << detail::num(cw + 0.3) << "\" height=\"" << detail::num(ch + 0.3) << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  os << "</g>\n";
  for (const auto& m : markers) {
    os << "<circle cx=\"" << detail::num(px(m.x)) << "\" cy=\"" << detail::num(py(m.y))
       << "\" r=\"5\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n";
  }
  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << detail::num(px(xv)) << "\" y=\"" << h - mb + 16 << "\" text-anchor=\"middle\">"
       << detail::num(xv) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << detail::num(py(yv) + 4) << "\" text-anchor=\"end\">" << detail::num(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 18 << "\" text-anchor=\"middle\">"
     << detail::escape(opt.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << (mt + h - mb) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << detail::escape(opt.y_label) << "</text>\n";
  // Colour bar.
  for (int k = 0; k < 50; ++k) {
    const double t = k / 49.0;
    os << "<rect x=\"" << w - mr + 20 << "\" y=\"" << detail::num(h - mb - (k + 1) * (h - mt - mb) / 50.0)
       << "\" width=\"18\" height=\"" << detail::num((h - mt - mb) / 50.0 + 0.3) << "\" fill=\"" << detail::ramp(t)
       << "\"/>\n";
  }
  os << "<text x=\"" << w - mr + 42 << "\" y=\"" << h - mb << "\">" << detail::num(v0) << "</text>\n";
  os << "<text x=\"" << w - mr + 42 << "\" y=\"" << mt + 10 << "\">" << detail::num(v1) << "</text>\n";
  os << "</g>\n</svg>\n";
}

}  // namespace hockens::svg
