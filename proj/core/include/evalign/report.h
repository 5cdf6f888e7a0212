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

#ifndef EVALIGN_REPORT_H_
#define EVALIGN_REPORT_H_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evalign {

struct MetricValue {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
  std::vector<std::string> flags;

  friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

struct CellKey {
  std::string axis;
  std::string variant;
  int shots = 0;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct ReportCell {
  // Metric name -> (mean, std) over seeds.
  std::map<std::string, MetricValue> metrics;
  // Breakdown family ("qtype", "negative_kind", "itype") -> key -> value.
  std::map<std::string, std::map<std::string, MetricValue>> breakdowns;
  // Counters summed over seeds (failed exchanges, unparsed probes, ...).
  std::map<std::string, std::int64_t> diagnostics;
  std::vector<std::string> errors;
  bool valid = true;

  friend bool operator==(const ReportCell&, const ReportCell&) = default;
};

struct ReportMetadata {
  std::string config_digest;
  std::string endpoint_id;
  std::string judge_endpoint_id;
  std::vector<std::int64_t> seeds;
  std::string chair_mode;
  std::string cider_mode;
  std::optional<std::string> created_at;

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct MetricReport {
  ReportMetadata metadata;
  std::map<CellKey, ReportCell> cells;
  std::vector<std::string> notices;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

// Lossless structured form (JSON, deterministic key order).
std::string ToJson(const MetricReport& report);
MetricReport ReportFromJson(std::string_view json);

// Reads either a structured report or a run log whose final line carries
// {"report": {...}}.
MetricReport ReadReport(const std::string& path);

// Header plus one row per (axis, variant, shots, metric).
std::string ToCsv(const MetricReport& report);

// "+17.56" / "-0.16" / "+0.00".
std::string FormatDelta(double delta);

// Markdown table of `variant` against `baseline` for one axis: each entry is
// "value (+delta)". Shots present in both variants only.
std::string DeltaTable(const MetricReport& report, std::string_view axis,
                       std::string_view variant, std::string_view baseline);

// SVG line chart of every metric against shots for one (axis, variant).
std::string RenderPlot(const MetricReport& report, std::string_view axis,
                       std::string_view variant);

struct EmitFormats {
  bool structured = true;
  bool tabular = true;
  bool plot = true;

  // Comma-separated subset of {structured, tabular, plot}.
  static EmitFormats Parse(std::string_view list);
};

// Writes report.json (structured) and, per (axis, variant),
// <axis>_<variant>.csv, <axis>_<variant>.svg and, when an "icl" baseline
// exists, <axis>_<variant>.delta.md. Returns written paths. Throws
// kInvalidArgument on an empty report and kIo on write failures.
std::vector<std::string> Emit(const MetricReport& report,
                              const std::string& directory,
                              const EmitFormats& formats = {});

}  // namespace evalign

#endif  // EVALIGN_REPORT_H_
