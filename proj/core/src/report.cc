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

#include "evalign/report.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "evalign/corpus.h"
#include "evalign/error.h"
#include "evalign/svg_chart.h"
#include "evalign/text.h"
#include "json.hpp"

namespace evalign {

using json = nlohmann::json;

namespace {

json ValueJson(const MetricValue& v) {
  return json{{"mean", v.mean}, {"std", v.std}, {"n", v.n}, {"flags", v.flags}};
}

MetricValue ValueFrom(const json& j) {
  MetricValue v;
  v.mean = j.at("mean").get<double>();
  v.std = j.at("std").get<double>();
  v.n = j.at("n").get<std::size_t>();
  v.flags = j.value("flags", std::vector<std::string>{});
  return v;
}

std::string Fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  std::string s = buf;
  // Avoid "-0.00".
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::set<std::pair<std::string, std::string>> Groups(const MetricReport& report) {
  std::set<std::pair<std::string, std::string>> groups;
  for (const auto& [key, cell] : report.cells) groups.emplace(key.axis, key.variant);
  return groups;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string CsvRows(const MetricReport& report, const std::string* axis,
                    const std::string* variant) {
  std::string out = "axis,variant,shots,metric,mean,std,n,flags\n";
  for (const auto& [key, cell] : report.cells) {
    if (axis && key.axis != *axis) continue;
    if (variant && key.variant != *variant) continue;
    for (const auto& [name, v] : cell.metrics) {
      out += CsvField(key.axis) + "," + CsvField(key.variant) + "," +
             std::to_string(key.shots) + "," + CsvField(name) + "," + Fixed(v.mean, 4) +
             "," + Fixed(v.std, 4) + "," + std::to_string(v.n) + "," +
             CsvField(Join(v.flags, ";")) + "\n";
    }
  }
  return out;
}

}  // namespace

std::string ToJson(const MetricReport& report) {
  const ReportMetadata& m = report.metadata;
  json meta = {{"config_digest", m.config_digest},
               {"endpoint_id", m.endpoint_id},
               {"judge_endpoint_id", m.judge_endpoint_id},
               {"seeds", m.seeds},
               {"chair_mode", m.chair_mode},
               {"cider_mode", m.cider_mode}};
  if (m.created_at) meta["created_at"] = *m.created_at;

  json cells = json::array();
  for (const auto& [key, cell] : report.cells) {
    json metrics = json::object();
    for (const auto& [name, v] : cell.metrics) metrics[name] = ValueJson(v);
    json breakdowns = json::object();
    for (const auto& [family, entries] : cell.breakdowns) {
      json fam = json::object();
      for (const auto& [name, v] : entries) fam[name] = ValueJson(v);
      breakdowns[family] = fam;
    }
    cells.push_back({{"axis", key.axis},
                     {"variant", key.variant},
                     {"shots", key.shots},
                     {"valid", cell.valid},
                     {"metrics", metrics},
                     {"breakdowns", breakdowns},
                     {"diagnostics", cell.diagnostics},
                     {"errors", cell.errors}});
  }
  return json{{"metadata", meta}, {"cells", cells}, {"notices", report.notices}}.dump(2) +
         "\n";
}

MetricReport ReportFromJson(std::string_view text) {
  MetricReport report;
  try {
    const json doc = json::parse(text);
    const json& meta = doc.at("metadata");
    ReportMetadata& m = report.metadata;
    m.config_digest = meta.value("config_digest", "");
    m.endpoint_id = meta.value("endpoint_id", "");
    m.judge_endpoint_id = meta.value("judge_endpoint_id", "");
    m.seeds = meta.value("seeds", std::vector<std::int64_t>{});
    m.chair_mode = meta.value("chair_mode", "");
    m.cider_mode = meta.value("cider_mode", "");
    if (meta.contains("created_at")) m.created_at = meta["created_at"].get<std::string>();

    for (const auto& c : doc.at("cells")) {
      CellKey key{c.at("axis").get<std::string>(), c.at("variant").get<std::string>(),
                  c.at("shots").get<int>()};
      ReportCell cell;
      cell.valid = c.value("valid", true);
      for (const auto& [name, v] : c.at("metrics").items()) cell.metrics[name] = ValueFrom(v);
      const json breakdowns = c.value("breakdowns", json::object());
      for (const auto& [family, entries] : breakdowns.items()) {
        auto& fam = cell.breakdowns[family];
        for (const auto& [name, v] : entries.items()) fam[name] = ValueFrom(v);
      }
      cell.diagnostics =
          c.value("diagnostics", std::map<std::string, std::int64_t>{});
      cell.errors = c.value("errors", std::vector<std::string>{});
      if (!report.cells.emplace(key, std::move(cell)).second) {
        throw Error(ErrorKind::kParse, "duplicate report cell " + key.axis + "/" +
                                           key.variant + "/" + std::to_string(key.shots));
      }
    }
    report.notices = doc.value("notices", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("report: ") + e.what());
  }
  return report;
}

MetricReport ReadReport(const std::string& path) {
  const std::string text = ReadTextFile(path);
  const std::string_view trimmed = Trim(text);
  if (!trimmed.empty() && trimmed.front() == '{' && json::accept(trimmed)) {
    return ReportFromJson(trimmed);
  }
  // Run log: the report rides on the last line.
  std::size_t end = trimmed.size();
  const std::size_t start = trimmed.rfind('\n');
  const std::string_view last =
      Trim(start == std::string_view::npos ? trimmed : trimmed.substr(start + 1, end));
  try {
    const json row = json::parse(last);
    if (row.is_object() && row.contains("report")) return ReportFromJson(row["report"].dump());
  } catch (const json::parse_error&) {
  }
  throw Error(ErrorKind::kParse, path + ": neither a report nor a run log ending in a report");
}

std::string ToCsv(const MetricReport& report) { return CsvRows(report, nullptr, nullptr); }

std::string FormatDelta(double delta) {
  const std::string body = Fixed(std::abs(delta), 2);
  const bool negative = delta < 0 && body != "0.00";
  return (negative ? "-" : "+") + body;
}

std::string DeltaTable(const MetricReport& report, std::string_view axis,
                       std::string_view variant, std::string_view baseline) {
  std::set<std::string> names;
  std::vector<std::pair<int, std::pair<const ReportCell*, const ReportCell*>>> rows;
  for (const auto& [key, cell] : report.cells) {
    if (key.axis != axis || key.variant != variant) continue;
    auto base = report.cells.find(CellKey{key.axis, std::string(baseline), key.shots});
    if (base == report.cells.end()) continue;
    rows.push_back({key.shots, {&cell, &base->second}});
    for (const auto& [name, v] : cell.metrics) {
      if (base->second.metrics.count(name)) names.insert(name);
    }
  }
  std::string out = "| shots |";
  std::string rule = "|---|";
  for (const auto& name : names) {
    out += " " + name + " |";
    rule += "---|";
  }
  out += "\n" + rule + "\n";
  for (const auto& [shots, cells] : rows) {
    out += "| " + std::to_string(shots) + " |";
    for (const auto& name : names) {
      auto v = cells.first->metrics.find(name);
      auto b = cells.second->metrics.find(name);
      if (v == cells.first->metrics.end() || b == cells.second->metrics.end()) {
        out += " |";
        continue;
      }
      out += " " + Fixed(v->second.mean, 2) + " (" +
             FormatDelta(v->second.mean - b->second.mean) + ") |";
    }
    out += "\n";
  }
  return out;
}

std::string RenderPlot(const MetricReport& report, std::string_view axis,
                       std::string_view variant) {
  LineChart chart;
  chart.title = std::string(axis) + " / " + std::string(variant);
  chart.x_label = "shots";
  chart.y_label = "score";
  std::map<std::string, ChartSeries> series;
  for (const auto& [key, cell] : report.cells) {
    if (key.axis != axis || key.variant != variant) continue;
    for (const auto& [name, v] : cell.metrics) {
      auto& s = series[name];
      s.name = name;
      s.points.push_back({static_cast<double>(key.shots), v.mean, v.std});
    }
  }
  for (auto& [name, s] : series) chart.series.push_back(std::move(s));
  return chart.ToSvg();
}

EmitFormats EmitFormats::Parse(std::string_view list) {
  EmitFormats f{false, false, false};
  std::size_t pos = 0;
  bool any = false;
  while (pos <= list.size()) {
    std::size_t comma = list.find(',', pos);
    if (comma == std::string_view::npos) comma = list.size();
    const std::string_view item = Trim(list.substr(pos, comma - pos));
    pos = comma + 1;
    if (item.empty()) continue;
    if (item == "structured" || item == "json") {
      f.structured = true;
    } else if (item == "tabular" || item == "csv") {
      f.tabular = true;
    } else if (item == "plot" || item == "svg") {
      f.plot = true;
    } else {
      throw Error(ErrorKind::kInvalidArgument, "unknown report format '" + std::string(item) + "'");
    }
    any = true;
  }
  if (!any) throw Error(ErrorKind::kInvalidArgument, "no report formats selected");
  return f;
}

std::vector<std::string> Emit(const MetricReport& report, const std::string& directory,
                              const EmitFormats& formats) {
  if (report.cells.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "refusing to emit an empty report");
  }
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create '" + directory + "': " + ec.message());
  const std::filesystem::path dir(directory);

  std::vector<std::string> written;
  auto write = [&](const std::string& name, const std::string& contents) {
    const std::string path = (dir / name).string();
    WriteTextFile(path, contents);
    written.push_back(path);
  };
  if (formats.structured) write("report.json", ToJson(report));
  for (const auto& [axis, variant] : Groups(report)) {
    const std::string stem = axis + "_" + variant;
    if (formats.tabular) {
      write(stem + ".csv", CsvRows(report, &axis, &variant));
      if (variant != "icl" && Groups(report).count({axis, "icl"})) {
        write(stem + ".delta.md", DeltaTable(report, axis, variant, "icl"));
      }
    }
    if (formats.plot) write(stem + ".svg", RenderPlot(report, axis, variant));
  }
  return written;
}

}  // namespace evalign
