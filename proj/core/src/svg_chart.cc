// Copyright 2026 The evalign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "evalign/svg_chart.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace evalign {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string Num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

std::string Label(double x) {
  char buf[32];
  if (std::abs(x - std::round(x)) < 1e-9) {
    std::snprintf(buf, sizeof(buf), "%.0f", x);
  } else {
    std::snprintf(buf, sizeof(buf), "%.2f", x);
  }
  return buf;
}

// Rounds `x` up to 1, 2 or 5 times a power of ten.
double NiceCeil(double x) {
  if (x <= 0.0) return 1.0;
  const double base = std::pow(10.0, std::floor(std::log10(x)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * base >= x - 1e-12) return m * base;
  }
  return 10.0 * base;
}

}  // namespace

std::string XmlEscape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string LineChart::ToSvg() const {
  const double left = 60, right = 150, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  std::set<double> xs;
  double y_min = 0.0;
  double y_max = 0.0;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      xs.insert(p.x);
      y_max = std::max(y_max, p.y + p.err);
      y_min = std::min(y_min, p.y - p.err);
    }
  }
  y_max = NiceCeil(y_max);
  if (y_min < 0.0) y_min = -NiceCeil(-y_min);
  const std::vector<double> x_values(xs.begin(), xs.end());
  const double x_lo = x_values.empty() ? 0.0 : x_values.front();
  const double x_hi = x_values.empty() ? 1.0 : x_values.back();

  auto px = [&](double x) {
    if (x_values.size() <= 1) return left + plot_w / 2;
    if (categorical_x) {
      const auto idx = std::lower_bound(x_values.begin(), x_values.end(), x) - x_values.begin();
      return left + plot_w * static_cast<double>(idx) / static_cast<double>(x_values.size() - 1);
    }
    return left + plot_w * (x - x_lo) / (x_hi - x_lo);
  };
  auto py = [&](double y) { return top + plot_h * (1.0 - (y - y_min) / (y_max - y_min)); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
         std::to_string(width) + " " + std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + Num(left + plot_w / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" + XmlEscape(title) + "</text>\n";

  // Axes.
  svg += "<line x1=\"" + Num(left) + "\" y1=\"" + Num(top + plot_h) + "\" x2=\"" +
         Num(left + plot_w) + "\" y2=\"" + Num(top + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + Num(left) + "\" y1=\"" + Num(top) + "\" x2=\"" + Num(left) +
         "\" y2=\"" + Num(top + plot_h) + "\" stroke=\"black\"/>\n";
  for (double x : x_values) {
    svg += "<line x1=\"" + Num(px(x)) + "\" y1=\"" + Num(top + plot_h) + "\" x2=\"" +
           Num(px(x)) + "\" y2=\"" + Num(top + plot_h + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + Num(px(x)) + "\" y=\"" + Num(top + plot_h + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           Label(x) + "</text>\n";
  }
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double y = y_min + (y_max - y_min) * i / kTicks;
    svg += "<line x1=\"" + Num(left - 5) + "\" y1=\"" + Num(py(y)) + "\" x2=\"" +
           Num(left) + "\" y2=\"" + Num(py(y)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + Num(left - 8) + "\" y=\"" + Num(py(y) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           Label(y) + "</text>\n";
  }
  svg += "<text x=\"" + Num(left + plot_w / 2) + "\" y=\"" + Num(height - 10.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         XmlEscape(x_label) + "</text>\n";
  svg += "<text x=\"15\" y=\"" + Num(top + plot_h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 15 " + Num(top + plot_h / 2) + ")\">" +
         XmlEscape(y_label) + "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const std::string color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::vector<ChartPoint> pts = s.points;
    std::sort(pts.begin(), pts.end(),
              [](const ChartPoint& a, const ChartPoint& b) { return a.x < b.x; });
    std::string path;
    for (const auto& p : pts) {
      path += (path.empty() ? "" : " ") + Num(px(p.x)) + "," + Num(py(p.y));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\" points=\"" +
           path + "\"/>\n";
    for (const auto& p : pts) {
      if (p.err > 0.0) {
        svg += "<line x1=\"" + Num(px(p.x)) + "\" y1=\"" + Num(py(p.y - p.err)) +
               "\" x2=\"" + Num(px(p.x)) + "\" y2=\"" + Num(py(p.y + p.err)) +
               "\" stroke=\"" + color + "\"/>\n";
      }
      svg += "<circle cx=\"" + Num(px(p.x)) + "\" cy=\"" + Num(py(p.y)) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    const double ly = top + 10 + 18.0 * static_cast<double>(i);
    svg += "<line x1=\"" + Num(left + plot_w + 15) + "\" y1=\"" + Num(ly) + "\" x2=\"" +
           Num(left + plot_w + 35) + "\" y2=\"" + Num(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + Num(left + plot_w + 40) + "\" y=\"" + Num(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + XmlEscape(s.name) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace evalign
