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

#ifndef EVALIGN_RUNNER_H_
#define EVALIGN_RUNNER_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evalign/corpus.h"
#include "evalign/metrics.h"
#include "evalign/modelio.h"
#include "evalign/report.h"
#include "evalign/templates.h"

namespace evalign {

enum class Axis {
  kHallucination,
  kAbstention,
  kCompositionality,
  kExplainability,
  kInstruction,
};

enum class Variant { kZeroShot, kIcl, kCohIcl, kScIcl, kMtIcl };

std::string_view AxisName(Axis axis);
std::string_view VariantName(Variant variant);
std::optional<Axis> ParseAxis(std::string_view name);
std::optional<Variant> ParseVariant(std::string_view name);

struct EndpointSettings {
  std::string url;
  std::size_t max_inflight = 4;
  int retry_budget = 3;
  int timeout_ms = 30000;
  std::string bearer_token;
};

enum class NegativeSource { kProvidedField, kGenerationsFile };

struct ExperimentConfig {
  Axis axis = Axis::kAbstention;
  std::vector<Variant> variants{Variant::kIcl};
  // Shot grid for context variants; zero-shot always runs as one 0-shot cell.
  std::vector<int> shots{0, 4, 8, 16, 32};
  std::vector<std::uint64_t> seeds{13, 17, 19};
  std::size_t n_queries = 500;
  int sc_correction_shots = 32;
  bool use_task_instruction = false;

  std::string dataset_path;
  // Native COCO instances document; when set, dataset_path is the native
  // captions document.
  std::string instances_path;
  std::string vocab_path;
  std::string exceptions_path;
  std::string templates_path;
  std::string judge_template_path;
  std::string abstention_keyword = std::string(kDefaultAbstentionKeyword);

  // Demonstration balancing; compositionality defaults to an even split.
  std::optional<BalancePolicy::Kind> demo_balance;
  // Self-correction probe demonstrations split evenly absurd/relevant.
  bool sc_balanced = true;

  std::optional<NegativeSource> negative_source;
  std::string negatives_path;

  ChairGroundTruth chair_mode = ChairGroundTruth::kInstances;
  // Score explanations only where the generated answer is correct.
  bool cider_correct_only = false;
  // Overrides the per-axis default generation parameters.
  std::optional<GenerationParams> params;

  std::optional<EndpointSettings> endpoint;
  std::optional<EndpointSettings> judge_endpoint;

  // A cell with a larger fraction of failed exchanges is invalid.
  double invalid_threshold = 0.10;
  bool record_timestamps = false;

  // Throws kConfig describing the first violated constraint.
  void Validate() const;
};

// Relative paths in the document resolve against `base_dir`.
ExperimentConfig ParseConfig(std::string_view json, const std::string& base_dir = ".");
ExperimentConfig LoadConfig(const std::string& path);
// Canonical JSON of the fields that affect results (no endpoints).
std::string CanonicalConfigJson(const ExperimentConfig& config);

// One line of the audit log per (cell, seed, query record).
struct RunRecord {
  CellKey cell;
  std::uint64_t seed = 0;
  std::size_t record_index = 0;
  std::string image_id;
  std::vector<std::string> prompt_digests;
  std::vector<std::string> outputs;
  std::string parsed;
  std::vector<std::string> flags;
};

// Thread-safe JSONL sink.
class RunLog {
 public:
  void Append(const RunRecord& record);
  void AppendReport(const MetricReport& report);
  std::string Contents() const;
  std::vector<RunRecord> Records() const;
  void WriteTo(const std::string& path) const;

 private:
  mutable std::mutex mu_;
  std::vector<RunRecord> records_;
  std::string report_line_;
};

std::string ToJsonLine(const RunRecord& record);
RunRecord RunRecordFromJson(std::string_view line);

struct RunContext {
  std::shared_ptr<Client> client;
  // Absent: judge-scored axes are skipped with a report notice.
  std::shared_ptr<Judge> judge;
  RunLog* log = nullptr;
};

// Runs every requested variant. Cells are sequential; exchanges within a
// cell fan out under the client's concurrency limit.
MetricReport RunAxis(const ExperimentConfig& config, RunContext& ctx);

// Two-pass abstention: ICL answers, then a relevance probe with
// `sc_correction_shots` demonstrations overrides answers judged irrelevant.
// Cells carry post-correction metrics plus "pre_"-prefixed originals.
MetricReport RunSelfCorrection(const ExperimentConfig& config, RunContext& ctx);

// Chain-of-hindsight explainability with human explanations as positives
// and the configured negative source.
MetricReport RunChainOfHindsight(const ExperimentConfig& config,
                                 RunContext& ctx);

// Judge-scored instruction following with type-matched demonstrations; adds
// the text-only two-shot control cell.
MetricReport RunInstructionAxis(const ExperimentConfig& config,
                                RunContext& ctx);

// Answers every record with ICL at max(shots) (demonstrations drawn from the
// other records, first seed) and writes {"record_index", "image_id",
// "output"} lines usable as a chain-of-hindsight negatives file.
void GenerateNegatives(const ExperimentConfig& config, RunContext& ctx,
                       const std::string& out_path);

}  // namespace evalign

#endif  // EVALIGN_RUNNER_H_
