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

#ifndef EVALIGN_SVG_CHART_H_
#define EVALIGN_SVG_CHART_H_

#include <optional>
#include <string>
#include <vector>

namespace evalign {

// Minimal deterministic SVG line chart: axes, ticks, line series with
// optional error whiskers, and a legend.
struct ChartPoint {
  double x = 0.0;
  double y = 0.0;
  double err = 0.0;
};

struct ChartSeries {
  std::string name;
  std::vector<ChartPoint> points;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  // Distinct x values are spaced evenly (shot grids are roughly geometric).
  bool categorical_x = true;
  std::vector<ChartSeries> series;
  int width = 640;
  int height = 400;

  std::string ToSvg() const;
};

std::string XmlEscape(const std::string& text);

}  // namespace evalign

#endif  // EVALIGN_SVG_CHART_H_
