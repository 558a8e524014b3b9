#pragma once

// Self-contained SVG semilog scatter plots: linear x (controller index), log10 y.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "qrobust/errors.hpp"

namespace qrobust::io {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  /// "circle", "square", "cross" or "line"
  std::string marker = "circle";
};

struct HorizontalLine {
  std::string name;
  double y = 0.0;
  std::string color = "#d62728";
};

class SemilogPlot {
 public:
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::vector<HorizontalLine> lines;
  int width = 720;
  int height = 440;

  std::string render() const {
    // Data range; non-positive y values cannot be drawn on a log axis and are skipped.
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!(s.y[i] > 0.0) || !std::isfinite(s.y[i]) || !std::isfinite(s.x[i])) continue;
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
    for (const auto& l : lines) {
      if (l.y > 0.0 && std::isfinite(l.y)) {
        ymin = std::min(ymin, l.y);
        ymax = std::max(ymax, l.y);
      }
    }
    if (!std::isfinite(xmin)) {
      xmin = 0.0;
      xmax = 1.0;
    }
    if (xmax == xmin) {
      xmin -= 1.0;
      xmax += 1.0;
    }
    if (!std::isfinite(ymin)) {
      ymin = 1e-3;
      ymax = 1.0;
    }
    const int d0 = static_cast<int>(std::floor(std::log10(ymin)));
    int d1 = static_cast<int>(std::ceil(std::log10(ymax)));
    if (d1 == d0) ++d1;
    const double pad = 0.02 * (xmax - xmin);
    xmin -= pad;
    xmax += pad;

    const double left = 80, right = 180, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;
    const auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    const auto py = [&](double y) { return top + (d1 - std::log10(y)) / (d1 - d0) * ph; };

    std::ostringstream o;
    o.precision(6);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";

    // Decade grid and y tick labels.
    for (int d = d0; d <= d1; ++d) {
      const double y = py(std::pow(10.0, d));
      o << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n";
      o << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
    }
    // x ticks
    const int ticks = 5;
    for (int t = 0; t <= ticks; ++t) {
      const double xv = xmin + pad + (xmax - xmin - 2 * pad) * t / ticks;
      o << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << tick_label(xv) << "</text>\n";
    }
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
      << escape(x_label) << "</text>\n";
    o << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(y_label) << "</text>\n";

    for (const auto& l : lines) {
      if (!(l.y > 0.0) || !std::isfinite(l.y)) continue;
      o << "<line x1=\"" << left << "\" y1=\"" << py(l.y) << "\" x2=\"" << left + pw << "\" y2=\""
        << py(l.y) << "\" stroke=\"" << l.color << "\" stroke-dasharray=\"6,4\"/>\n";
    }

    for (const auto& s : series) {
      o << "<g fill=\"" << s.color << "\" stroke=\"" << s.color << "\">\n";
      std::string path;
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
        const double x = px(s.x[i]), y = py(s.y[i]);
        if (s.marker == "line") {
          std::ostringstream p;
          p << (path.empty() ? "M" : " L") << x << ' ' << y;
          path += p.str();
        } else if (s.marker == "square") {
          o << "<rect x=\"" << x - 3 << "\" y=\"" << y - 3 << "\" width=\"6\" height=\"6\" fill=\"none\"/>\n";
        } else if (s.marker == "cross") {
          o << "<path d=\"M" << x - 3 << ' ' << y - 3 << " L" << x + 3 << ' ' << y + 3 << " M" << x - 3
            << ' ' << y + 3 << " L" << x + 3 << ' ' << y - 3 << "\" fill=\"none\"/>\n";
        } else {
          o << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"2.5\"/>\n";
        }
      }
      if (!path.empty()) o << "<path d=\"" << path << "\" fill=\"none\"/>\n";
      o << "</g>\n";
    }

    // Legend
    double ly = top + 10;
    const double lx = left + pw + 16;
    for (const auto& s : series) {
      o << "<rect x=\"" << lx << "\" y=\"" << ly - 8 << "\" width=\"10\" height=\"10\" fill=\"" << s.color
        << "\"/><text x=\"" << lx + 16 << "\" y=\"" << ly + 1 << "\">" << escape(s.name) << "</text>\n";
      ly += 18;
    }
    for (const auto& l : lines) {
      o << "<line x1=\"" << lx << "\" y1=\"" << ly - 3 << "\" x2=\"" << lx + 10 << "\" y2=\"" << ly - 3
        << "\" stroke=\"" << l.color << "\" stroke-dasharray=\"3,2\"/><text x=\"" << lx + 16 << "\" y=\""
        << ly + 1 << "\">" << escape(l.name) << "</text>\n";
      ly += 18;
    }
    o << "</svg>\n";
    return o.str();
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f << render();
  }

 private:
  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
      }
    }
    return out;
  }

  static std::string tick_label(double v) {
    std::ostringstream s;
    s.precision(4);
    s << (std::abs(v) < 1e-12 ? 0.0 : v);
    return s.str();
  }
};

}  // namespace qrobust::io
