/*
 Copyright 2026 The jfboc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "jfboc/cli/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace jfboc::cli {
namespace {

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                                 "#9467bd", "#ff7f0e", "#17becf"};
constexpr double kPanelW = 460.0;
constexpr double kPanelH = 320.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 16.0;
constexpr double kTop = 34.0;
constexpr double kBottom = 48.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-3)) {
    std::snprintf(buf, sizeof buf, "%.1e", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.3g", v);
  }
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = std::max(1.0, std::abs(hi)) * 0.05;
      lo -= pad;
      hi += pad;
    }
  }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (raw <= step) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

// Values of the form {1, 2, 5} x 10^k inside [10^lo, 10^hi]; decades only when dense.
std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  for (const bool decades_only : {false, true}) {
    ticks.clear();
    for (int k = static_cast<int>(std::floor(lo)); k <= static_cast<int>(std::ceil(hi)); ++k) {
      for (const double m : {1.0, 2.0, 5.0}) {
        if (decades_only && m != 1.0) continue;
        const double v = m * std::pow(10.0, k);
        const double l = std::log10(v);
        if (l >= lo - 1e-9 && l <= hi + 1e-9) ticks.push_back(v);
      }
    }
    if (ticks.size() <= 8) break;
  }
  if (ticks.size() < 2) {
    ticks.clear();
    for (const double t : nice_ticks(std::pow(10.0, lo), std::pow(10.0, hi))) {
      if (t > 0.0) ticks.push_back(t);
    }
  }
  return ticks;
}

class Axes {
 public:
  Axes(double ox, double oy, Range x, Range y, bool log_y)
      : ox_(ox), oy_(oy), x_(x), y_(y), log_y_(log_y) {
    if (log_y_) {
      y_.lo = std::log10(y_.lo);
      y_.hi = std::log10(y_.hi);
      y_.finish();
    }
  }
  double px(double x) const {
    return ox_ + kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kPanelW - kLeft - kRight);
  }
  double py(double y) const {
    const double v = log_y_ ? std::log10(y) : y;
    return oy_ + kPanelH - kBottom - (v - y_.lo) / (y_.hi - y_.lo) * (kPanelH - kTop - kBottom);
  }

  void frame(std::ostringstream& o, const Panel& p) const {
    const double x0 = ox_ + kLeft, x1 = ox_ + kPanelW - kRight;
    const double y0 = oy_ + kTop, y1 = oy_ + kPanelH - kBottom;
    o << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0)
      << "\" height=\"" << num(y1 - y0) << "\" fill=\"none\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(oy_ + 20)
      << "\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(p.title) << "</text>\n";
    o << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(oy_ + kPanelH - 10)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(p.x_label) << "</text>\n";
    o << "<text transform=\"translate(" << num(ox_ + 14) << "," << num((y0 + y1) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(p.y_label)
      << "</text>\n";
    for (const double t : nice_ticks(x_.lo, x_.hi)) {
      o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(px(t))
        << "\" y2=\"" << num(y1 + 4) << "\" stroke=\"#444\"/>";
      o << "<text x=\"" << num(px(t)) << "\" y=\"" << num(y1 + 16)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << tick_label(t) << "</text>\n";
    }
    for (const double value : log_y_ ? log_ticks(y_.lo, y_.hi) : nice_ticks(y_.lo, y_.hi)) {
      const double y = py(value);
      o << "<line x1=\"" << num(x0 - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x0)
        << "\" y2=\"" << num(y) << "\" stroke=\"#444\"/>";
      o << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y + 3)
        << "\" text-anchor=\"end\" font-size=\"10\">" << tick_label(value) << "</text>\n";
    }
  }

 private:
  double ox_, oy_;
  Range x_, y_;
  bool log_y_;
};

void draw_series(std::ostringstream& o, const Axes& ax, const PlotSeries& s, const char* colour) {
  std::ostringstream band, mean;
  std::size_t n = std::min({s.x.size(), s.mean.size(), s.lo.size(), s.hi.size()});
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(s.hi[i]) || !std::isfinite(s.mean[i])) continue;
    band << num(ax.px(s.x[i])) << ',' << num(ax.py(s.hi[i])) << ' ';
    mean << num(ax.px(s.x[i])) << ',' << num(ax.py(s.mean[i])) << ' ';
  }
  for (std::size_t i = n; i-- > 0;) {
    if (!std::isfinite(s.lo[i])) continue;
    band << num(ax.px(s.x[i])) << ',' << num(ax.py(s.lo[i])) << ' ';
  }
  o << "<polygon class=\"band\" points=\"" << band.str() << "\" fill=\"" << colour
    << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
  o << "<polyline class=\"mean\" points=\"" << mean.str() << "\" fill=\"none\" stroke=\""
    << colour << "\" stroke-width=\"1.6\"/>\n";
}

}  // namespace

std::string escape_xml(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_panels(const std::vector<Panel>& panels, int columns) {
  columns = std::max(1, columns);
  const int rows = (static_cast<int>(panels.size()) + columns - 1) / columns;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(columns * kPanelW)
    << "\" height=\"" << num(std::max(1, rows) * kPanelH) << "\" font-family=\"sans-serif\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    const double ox = static_cast<double>(static_cast<int>(p) % columns) * kPanelW;
    const double oy = static_cast<double>(static_cast<int>(p) / columns) * kPanelH;
    Range xr, yr;
    bool positive = true;
    for (const PlotSeries& s : panel.series) {
      for (double v : s.x) xr.add(v);
      for (const auto* vals : {&s.lo, &s.hi, &s.mean}) {
        for (double v : *vals) {
          yr.add(v);
          if (std::isfinite(v) && v <= 0.0) positive = false;
        }
      }
    }
    const bool log_y = panel.log_y && positive && std::isfinite(yr.lo);
    xr.finish();
    yr.finish();
    const Axes ax(ox, oy, xr, yr, log_y);
    o << "<g class=\"panel\">\n";
    ax.frame(o, panel);
    for (std::size_t s = 0; s < panel.series.size(); ++s) {
      draw_series(o, ax, panel.series[s], kPalette[s % kPalette.size()]);
    }
    for (std::size_t s = 0; s < panel.series.size(); ++s) {
      const double ly = oy + kTop + 14 + 16 * static_cast<double>(s);
      const double lx = ox + kPanelW - kRight - 120;
      o << "<g class=\"legend-entry\"><line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4)
        << "\" x2=\"" << num(lx + 18) << "\" y2=\"" << num(ly - 4) << "\" stroke=\""
        << kPalette[s % kPalette.size()] << "\" stroke-width=\"2\"/><text x=\"" << num(lx + 24)
        << "\" y=\"" << num(ly) << "\" font-size=\"11\">" << escape_xml(panel.series[s].label)
        << "</text></g>\n";
    }
    o << "</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string render_trajectories(const std::vector<Polyline2D>& paths, const std::string& title) {
  constexpr double size = 560.0, margin = 40.0;
  Range xr, yr;
  for (const Polyline2D& p : paths) {
    for (double v : p.x) xr.add(v);
    for (double v : p.y) yr.add(v);
  }
  xr.finish();
  yr.finish();
  const double span = std::max(xr.hi - xr.lo, yr.hi - yr.lo) * 1.1;
  const double cx = 0.5 * (xr.lo + xr.hi), cy = 0.5 * (yr.lo + yr.hi);
  const double scale = (size - 2 * margin) / span;
  const auto px = [&](double x) { return size / 2 + (x - cx) * scale; };
  const auto py = [&](double y) { return size / 2 - (y - cy) * scale; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(size) << "\" height=\""
    << num(size) << "\" font-family=\"sans-serif\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(size / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(title) << "</text>\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const Polyline2D& p = paths[i];
    const char* colour = kPalette[i % kPalette.size()];
    o << "<polyline class=\"trajectory\" points=\"";
    const std::size_t n = std::min(p.x.size(), p.y.size());
    for (std::size_t k = 0; k < n; ++k) o << num(px(p.x[k])) << ',' << num(py(p.y[k])) << ' ';
    o << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
    if (n == 0) continue;
    o << "<circle class=\"start-marker\" cx=\"" << num(px(p.x.front())) << "\" cy=\""
      << num(py(p.y.front())) << "\" r=\"4\" fill=\"" << colour << "\"/>\n";
    o << "<rect class=\"end-marker\" x=\"" << num(px(p.x[n - 1]) - 4) << "\" y=\""
      << num(py(p.y[n - 1]) - 4) << "\" width=\"8\" height=\"8\" fill=\"none\" stroke=\""
      << colour << "\" stroke-width=\"1.5\"/>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace jfboc::cli
