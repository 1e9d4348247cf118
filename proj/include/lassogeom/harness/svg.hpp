#pragma once

// Minimal SVG line/scatter plots: linear axes with ticks, polylines that
// break at non-finite points, scatter markers, vertical markers, legend.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lassogeom/errors.hpp"

namespace lassogeom::harness {

struct SvgSeries {
  enum class Style { Line, Dashed, Points };
  std::string label;
  std::string color = "#000000";
  Style style = Style::Line;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgMarker {
  std::string label;
  double x = 0.0;
  std::string color = "#777777";
};

class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void add(SvgSeries s) { series_.push_back(std::move(s)); }
  void add_marker(SvgMarker m) { markers_.push_back(std::move(m)); }
  void set_y_range(double lo, double hi) {
    ylo_ = lo;
    yhi_ = hi;
  }
  void add_hline(double y) { hlines_.push_back(y); }

  std::string render(int width = 720, int height = 480) const {
    double xlo = kInf, xhi = -kInf, ylo = kInf, yhi = -kInf;
    for (const auto& s : series_)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        xlo = std::min(xlo, s.x[i]);
        xhi = std::max(xhi, s.x[i]);
        ylo = std::min(ylo, s.y[i]);
        yhi = std::max(yhi, s.y[i]);
      }
    for (const auto& m : markers_) {
      xlo = std::min(xlo, m.x);
      xhi = std::max(xhi, m.x);
    }
    for (double h : hlines_) {
      ylo = std::min(ylo, h);
      yhi = std::max(yhi, h);
    }
    if (!std::isfinite(xlo)) xlo = 0.0, xhi = 1.0;
    if (!std::isfinite(ylo)) ylo = 0.0, yhi = 1.0;
    if (std::isfinite(ylo_)) ylo = ylo_;
    if (std::isfinite(yhi_)) yhi = yhi_;
    if (xhi <= xlo) xhi = xlo + 1.0;
    if (yhi <= ylo) yhi = ylo + 1.0;
    const double ypad = 0.05 * (yhi - ylo);
    if (!std::isfinite(ylo_)) ylo -= ypad;
    if (!std::isfinite(yhi_)) yhi += ypad;

    const double left = 70, right = 170, top = 40, bottom = 55;
    const double pw = width - left - right, ph = height - top - bottom;
    auto X = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
    auto Y = [&](double y) { return top + (1.0 - (y - ylo) / (yhi - ylo)) * ph; };
    auto inside = [&](double y) { return y >= ylo && y <= yhi; };

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title_)
       << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(xlo, xhi)) {
      os << "<line x1=\"" << X(t) << "\" y1=\"" << top + ph << "\" x2=\"" << X(t) << "\" y2=\"" << top + ph + 5
         << "\" stroke=\"black\"/>\n";
      os << "<text x=\"" << X(t) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << label(t)
         << "</text>\n";
    }
    for (double t : ticks(ylo, yhi)) {
      os << "<line x1=\"" << left - 5 << "\" y1=\"" << Y(t) << "\" x2=\"" << left << "\" y2=\"" << Y(t)
         << "\" stroke=\"black\"/>\n";
      os << "<text x=\"" << left - 8 << "\" y=\"" << Y(t) + 4 << "\" text-anchor=\"end\">" << label(t)
         << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
       << escape(xlabel_) << "</text>\n";
    os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << top + ph / 2 << ")\">" << escape(ylabel_) << "</text>\n";
    os << "<clipPath id=\"plot\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\""
       << ph << "\"/></clipPath>\n<g clip-path=\"url(#plot)\">\n";
    for (double h : hlines_)
      if (inside(h))
        os << "<line x1=\"" << left << "\" y1=\"" << Y(h) << "\" x2=\"" << left + pw << "\" y2=\"" << Y(h)
           << "\" stroke=\"#bbbbbb\"/>\n";
    for (const auto& m : markers_)
      os << "<line x1=\"" << X(m.x) << "\" y1=\"" << top << "\" x2=\"" << X(m.x) << "\" y2=\"" << top + ph
         << "\" stroke=\"" << m.color << "\" stroke-dasharray=\"2,3\"/>\n";
    for (const auto& s : series_) {
      if (s.style == SvgSeries::Style::Points) {
        for (std::size_t i = 0; i < s.x.size(); ++i)
          if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
            os << "<circle cx=\"" << X(s.x[i]) << "\" cy=\"" << Y(s.y[i]) << "\" r=\"2.5\" fill=\"" << s.color
               << "\" fill-opacity=\"0.7\"/>\n";
        continue;
      }
      std::string pts;
      auto flush = [&] {
        if (pts.empty()) return;
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\""
           << (s.style == SvgSeries::Style::Dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts
           << "\"/>\n";
        pts.clear();
      };
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
          flush();
          continue;
        }
        std::ostringstream p;
        p.precision(6);
        p << X(s.x[i]) << ',' << Y(s.y[i]) << ' ';
        pts += p.str();
      }
      flush();
    }
    os << "</g>\n";
    for (const auto& m : markers_) {
      const bool right_half = X(m.x) > left + pw / 2;
      os << "<text x=\"" << X(m.x) + (right_half ? -3 : 3) << "\" y=\"" << top + 12 << "\" fill=\"" << m.color
         << "\"" << (right_half ? " text-anchor=\"end\"" : "") << ">" << escape(m.label) << "</text>\n";
    }
    double ly = top + 10;
    for (const auto& s : series_) {
      const double lx = left + pw + 12;
      if (s.style == SvgSeries::Style::Points)
        os << "<circle cx=\"" << lx + 10 << "\" cy=\"" << ly << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
      else
        os << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 20 << "\" y2=\"" << ly << "\" stroke=\""
           << s.color << "\" stroke-width=\"1.6\""
           << (s.style == SvgSeries::Style::Dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
      os << "<text x=\"" << lx + 26 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
      ly += 18;
    }
    os << "</svg>\n";
    return os.str();
  }

  void write(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InvalidArgument("cannot write '" + path + "'");
    os << render();
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  static std::vector<double> ticks(double lo, double hi) {
    const double raw = (hi - lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
      out.push_back(std::fabs(t) < 1e-12 * step ? 0.0 : t);
    return out;
  }

  static std::string label(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else if (c == '&') out += "&amp;";
      else out += c;
    }
    return out;
  }

  std::string title_, xlabel_, ylabel_;
  std::vector<SvgSeries> series_;
  std::vector<SvgMarker> markers_;
  std::vector<double> hlines_;
  double ylo_ = std::numeric_limits<double>::quiet_NaN();
  double yhi_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace lassogeom::harness
