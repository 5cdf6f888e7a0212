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

#include <filesystem>
#include <set>

#include "evalign/error.h"
#include "evalign/runner.h"
#include "json.hpp"

namespace evalign {

using json = nlohmann::json;

namespace {

constexpr std::pair<Axis, std::string_view> kAxes[] = {
    {Axis::kHallucination, "hallucination"},
    {Axis::kAbstention, "abstention"},
    {Axis::kCompositionality, "compositionality"},
    {Axis::kExplainability, "explainability"},
    {Axis::kInstruction, "instruction"},
};

constexpr std::pair<Variant, std::string_view> kVariants[] = {
    {Variant::kZeroShot, "zero_shot"}, {Variant::kIcl, "icl"},
    {Variant::kCohIcl, "coh_icl"},     {Variant::kScIcl, "sc_icl"},
    {Variant::kMtIcl, "mt_icl"},
};

[[noreturn]] void ConfigError(const std::string& message) {
  throw Error(ErrorKind::kConfig, message);
}

template <typename T>
bool HasDuplicates(const std::vector<T>& items) {
  return std::set<T>(items.begin(), items.end()).size() != items.size();
}

std::string Resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

GenerationParams ParamsFrom(const json& j) {
  static const std::set<std::string> kKeys = {"max_new_tokens", "decoding", "temperature",
                                              "top_p", "stop", "seed"};
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) ConfigError("params: unknown key '" + k + "'");
  }
  GenerationParams p;
  p.max_new_tokens = j.value("max_new_tokens", p.max_new_tokens);
  const std::string decoding = j.value("decoding", std::string("greedy"));
  if (decoding == "greedy") {
    p.decoding = GenerationParams::Decoding::kGreedy;
  } else if (decoding == "sample") {
    p.decoding = GenerationParams::Decoding::kSample;
  } else {
    ConfigError("params.decoding must be greedy or sample");
  }
  p.temperature = j.value("temperature", p.temperature);
  p.top_p = j.value("top_p", p.top_p);
  p.stop_sequences = j.value("stop", std::vector<std::string>{});
  if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
  return p;
}

json ParamsJson(const GenerationParams& p) {
  json j = {{"max_new_tokens", p.max_new_tokens},
            {"decoding", p.decoding == GenerationParams::Decoding::kGreedy ? "greedy" : "sample"},
            {"temperature", p.temperature},
            {"top_p", p.top_p},
            {"stop", p.stop_sequences}};
  if (p.seed) j["seed"] = *p.seed;
  return j;
}

EndpointSettings EndpointFrom(const json& j, const char* where) {
  static const std::set<std::string> kKeys = {"url", "max_inflight", "retry_budget",
                                              "timeout_ms"};
  EndpointSettings e;
  if (j.is_string()) {
    e.url = j.get<std::string>();
    return e;
  }
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.count(k)) ConfigError(std::string(where) + ": unknown key '" + k + "'");
  }
  e.url = j.at("url").get<std::string>();
  e.max_inflight = j.value("max_inflight", e.max_inflight);
  e.retry_budget = j.value("retry_budget", e.retry_budget);
  e.timeout_ms = j.value("timeout_ms", e.timeout_ms);
  return e;
}

}  // namespace

std::string_view AxisName(Axis axis) {
  for (const auto& [a, name] : kAxes) {
    if (a == axis) return name;
  }
  return "";
}

std::string_view VariantName(Variant variant) {
  for (const auto& [v, name] : kVariants) {
    if (v == variant) return name;
  }
  return "";
}

std::optional<Axis> ParseAxis(std::string_view name) {
  for (const auto& [a, n] : kAxes) {
    if (n == name) return a;
  }
  return std::nullopt;
}

std::optional<Variant> ParseVariant(std::string_view name) {
  for (const auto& [v, n] : kVariants) {
    if (n == name) return v;
  }
  return std::nullopt;
}

void ExperimentConfig::Validate() const {
  if (variants.empty()) ConfigError("no variants selected");
  if (HasDuplicates(variants)) ConfigError("duplicate variants");
  if (shots.empty()) ConfigError("shot grid is empty");
  if (HasDuplicates(shots)) ConfigError("duplicate shot counts");
  for (int s : shots) {
    if (s < 0) ConfigError("shot counts must be >= 0");
  }
  if (seeds.empty()) ConfigError("no seeds");
  if (HasDuplicates(seeds)) ConfigError("duplicate seeds");
  if (n_queries == 0) ConfigError("n_queries must be >= 1");
  if (sc_correction_shots < 1) ConfigError("sc_correction_shots must be >= 1");
  if (dataset_path.empty()) ConfigError("dataset path is required");
  if (!(invalid_threshold >= 0.0 && invalid_threshold <= 1.0)) {
    ConfigError("invalid_threshold must be in [0, 1]");
  }
  if (params) {
    try {
      params->Validate();
    } catch (const Error& e) {
      ConfigError(std::string("params: ") + e.what());
    }
  }

  const std::string axis_name(AxisName(axis));
  for (Variant v : variants) {
    const std::string combo = std::string(VariantName(v)) + " on " + axis_name;
    switch (v) {
      case Variant::kZeroShot:
      case Variant::kIcl:
        break;
      case Variant::kScIcl:
        if (axis != Axis::kAbstention) ConfigError(combo + ": sc_icl needs the abstention axis");
        break;
      case Variant::kCohIcl:
        if (axis != Axis::kExplainability) {
          ConfigError(combo + ": coh_icl is defined for explainability only");
        }
        if (!negative_source) ConfigError(combo + ": coh_icl needs a negative_source");
        if (*negative_source == NegativeSource::kGenerationsFile && negatives_path.empty()) {
          ConfigError(combo + ": negative_source generations_file needs a negatives path");
        }
        break;
      case Variant::kMtIcl:
        if (axis != Axis::kAbstention && axis != Axis::kExplainability &&
            axis != Axis::kHallucination) {
          ConfigError(combo + ": no auxiliary task is defined for this axis");
        }
        break;
    }
    if (axis == Axis::kInstruction && v != Variant::kIcl && v != Variant::kZeroShot) {
      ConfigError(combo + ": the instruction axis supports zero_shot and icl");
    }
  }
  if (axis == Axis::kHallucination && vocab_path.empty() && !exceptions_path.empty()) {
    ConfigError("exceptions file given without a vocabulary file");
  }
  for (const auto* e : {&endpoint, &judge_endpoint}) {
    if (*e && (*e)->max_inflight == 0) ConfigError("endpoint max_inflight must be >= 1");
    if (*e && (*e)->retry_budget < 0) ConfigError("endpoint retry_budget must be >= 0");
  }
}

ExperimentConfig ParseConfig(std::string_view text, const std::string& base_dir) {
  static const std::set<std::string> kKeys = {
      "axis", "variants", "shots", "seeds", "n_queries", "sc_correction_shots",
      "use_task_instruction", "dataset", "instances", "vocab", "exceptions", "templates",
      "judge_template", "abstention_keyword", "demo_balance", "sc_balanced",
      "negative_source", "negatives", "chair_mode", "cider_correct_only", "params",
      "endpoint", "judge_endpoint", "invalid_threshold", "record_timestamps"};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kConfig, std::string("config is not JSON: ") + e.what());
  }
  if (!doc.is_object()) ConfigError("config must be an object");
  for (const auto& [k, v] : doc.items()) {
    if (!kKeys.count(k)) ConfigError("unknown config key '" + k + "'");
  }

  ExperimentConfig c;
  try {
    const std::string axis = doc.at("axis").get<std::string>();
    auto parsed_axis = ParseAxis(axis);
    if (!parsed_axis) ConfigError("unknown axis '" + axis + "'");
    c.axis = *parsed_axis;
    if (doc.contains("variants")) {
      c.variants.clear();
      for (const auto& v : doc["variants"]) {
        auto parsed = ParseVariant(v.get<std::string>());
        if (!parsed) ConfigError("unknown variant '" + v.get<std::string>() + "'");
        c.variants.push_back(*parsed);
      }
    }
    c.shots = doc.value("shots", c.shots);
    c.seeds = doc.value("seeds", c.seeds);
    c.n_queries = doc.value("n_queries", c.n_queries);
    c.sc_correction_shots = doc.value("sc_correction_shots", c.sc_correction_shots);
    c.use_task_instruction = doc.value("use_task_instruction", c.use_task_instruction);
    c.dataset_path = Resolve(doc.value("dataset", std::string()), base_dir);
    c.instances_path = Resolve(doc.value("instances", std::string()), base_dir);
    c.vocab_path = Resolve(doc.value("vocab", std::string()), base_dir);
    c.exceptions_path = Resolve(doc.value("exceptions", std::string()), base_dir);
    c.templates_path = Resolve(doc.value("templates", std::string()), base_dir);
    c.judge_template_path = Resolve(doc.value("judge_template", std::string()), base_dir);
    c.abstention_keyword = doc.value("abstention_keyword", c.abstention_keyword);
    if (doc.contains("demo_balance")) {
      const std::string b = doc["demo_balance"].get<std::string>();
      if (b == "natural") {
        c.demo_balance = BalancePolicy::Kind::kNatural;
      } else if (b == "by_label") {
        c.demo_balance = BalancePolicy::Kind::kByLabel;
      } else {
        ConfigError("demo_balance must be natural or by_label");
      }
    }
    c.sc_balanced = doc.value("sc_balanced", c.sc_balanced);
    if (doc.contains("negative_source")) {
      const std::string s = doc["negative_source"].get<std::string>();
      if (s == "provided_field") {
        c.negative_source = NegativeSource::kProvidedField;
      } else if (s == "generations_file") {
        c.negative_source = NegativeSource::kGenerationsFile;
      } else {
        ConfigError("negative_source must be provided_field or generations_file");
      }
    }
    c.negatives_path = Resolve(doc.value("negatives", std::string()), base_dir);
    const std::string chair = doc.value("chair_mode", std::string("instances"));
    if (chair == "instances") {
      c.chair_mode = ChairGroundTruth::kInstances;
    } else if (chair == "instances_and_references") {
      c.chair_mode = ChairGroundTruth::kInstancesAndReferences;
    } else {
      ConfigError("chair_mode must be instances or instances_and_references");
    }
    c.cider_correct_only = doc.value("cider_correct_only", c.cider_correct_only);
    if (doc.contains("params")) c.params = ParamsFrom(doc["params"]);
    if (doc.contains("endpoint")) c.endpoint = EndpointFrom(doc["endpoint"], "endpoint");
    if (doc.contains("judge_endpoint")) {
      c.judge_endpoint = EndpointFrom(doc["judge_endpoint"], "judge_endpoint");
    }
    c.invalid_threshold = doc.value("invalid_threshold", c.invalid_threshold);
    c.record_timestamps = doc.value("record_timestamps", c.record_timestamps);
  } catch (const json::exception& e) {
    ConfigError(std::string("config: ") + e.what());
  }
  c.Validate();
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  const std::string base = std::filesystem::path(path).parent_path().string();
  return ParseConfig(ReadTextFile(path), base.empty() ? "." : base);
}

std::string CanonicalConfigJson(const ExperimentConfig& c) {
  json variants = json::array();
  for (Variant v : c.variants) variants.push_back(VariantName(v));
  // Paths contribute their file names only so relocating a checkout keeps
  // the digest stable.
  auto name = [](const std::string& p) {
    return p.empty() ? std::string() : std::filesystem::path(p).filename().string();
  };
  json j = {
      {"axis", AxisName(c.axis)},
      {"variants", variants},
      {"shots", c.shots},
      {"seeds", c.seeds},
      {"n_queries", c.n_queries},
      {"sc_correction_shots", c.sc_correction_shots},
      {"use_task_instruction", c.use_task_instruction},
      {"dataset", name(c.dataset_path)},
      {"instances", name(c.instances_path)},
      {"vocab", name(c.vocab_path)},
      {"exceptions", name(c.exceptions_path)},
      {"templates", name(c.templates_path)},
      {"judge_template", name(c.judge_template_path)},
      {"abstention_keyword", c.abstention_keyword},
      {"demo_balance", c.demo_balance
                           ? (*c.demo_balance == BalancePolicy::Kind::kNatural ? "natural"
                                                                               : "by_label")
                           : "default"},
      {"sc_balanced", c.sc_balanced},
      {"negative_source",
       c.negative_source ? (*c.negative_source == NegativeSource::kProvidedField
                                ? "provided_field"
                                : "generations_file")
                         : ""},
      {"negatives", name(c.negatives_path)},
      {"chair_mode", c.chair_mode == ChairGroundTruth::kInstances ? "instances"
                                                                  : "instances_and_references"},
      {"cider_correct_only", c.cider_correct_only},
      {"invalid_threshold", c.invalid_threshold},
  };
  j["params"] = c.params ? ParamsJson(*c.params) : json(nullptr);
  return j.dump();
}

}  // namespace evalign
