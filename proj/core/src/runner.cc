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

#include "evalign/runner.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>

#include "evalign/error.h"
#include "evalign/text.h"
#include "json.hpp"

namespace evalign {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Run log.

std::string ToJsonLine(const RunRecord& r) {
  return json{{"cell", {{"axis", r.cell.axis}, {"variant", r.cell.variant}, {"shots", r.cell.shots}}},
              {"seed", r.seed},
              {"record_index", r.record_index},
              {"image_id", r.image_id},
              {"prompt_digests", r.prompt_digests},
              {"outputs", r.outputs},
              {"parsed", r.parsed},
              {"flags", r.flags}}
      .dump();
}

RunRecord RunRecordFromJson(std::string_view line) {
  RunRecord r;
  try {
    const json j = json::parse(line);
    const json& cell = j.at("cell");
    r.cell = {cell.at("axis").get<std::string>(), cell.at("variant").get<std::string>(),
              cell.at("shots").get<int>()};
    r.seed = j.at("seed").get<std::uint64_t>();
    r.record_index = j.at("record_index").get<std::size_t>();
    r.image_id = j.value("image_id", "");
    r.prompt_digests = j.value("prompt_digests", std::vector<std::string>{});
    r.outputs = j.value("outputs", std::vector<std::string>{});
    r.parsed = j.value("parsed", "");
    r.flags = j.value("flags", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("run log line: ") + e.what());
  }
  return r;
}

void RunLog::Append(const RunRecord& record) {
  std::lock_guard<std::mutex> lock(mu_);
  records_.push_back(record);
}

void RunLog::AppendReport(const MetricReport& report) {
  const std::string line = json{{"report", json::parse(ToJson(report))}}.dump();
  std::lock_guard<std::mutex> lock(mu_);
  report_line_ = line;
}

std::string RunLog::Contents() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::string out;
  for (const auto& r : records_) out += ToJsonLine(r) + "\n";
  if (!report_line_.empty()) out += report_line_ + "\n";
  return out;
}

std::vector<RunRecord> RunLog::Records() const {
  std::lock_guard<std::mutex> lock(mu_);
  return records_;
}

void RunLog::WriteTo(const std::string& path) const { WriteTextFile(path, Contents()); }

// ---------------------------------------------------------------------------

namespace {

// RNG stream bases; the shot count is added so grids do not share draws.
constexpr std::uint64_t kDemoStream = 1000;
constexpr std::uint64_t kProbeStream = 200000;
constexpr std::uint64_t kZeroShotStream = 300000;
constexpr std::uint64_t kNegativesStream = 400000;

// Metrics are reported on a 0-100 scale.
constexpr double kPercent = 100.0;

struct SeedOutcome {
  std::map<std::string, double> metrics;
  std::map<std::string, std::map<std::string, double>> breakdowns;
  std::map<std::string, std::int64_t> diagnostics;
  std::map<std::string, std::set<std::string>> metric_flags;
  std::size_t exchanges = 0;
  std::size_t failures = 0;
  std::vector<std::string> errors;
};

std::string PromptDigest(const InterleavedPrompt& prompt, const PromptTemplate& tmpl) {
  std::string bytes = Serialize(prompt, tmpl);
  for (const auto& img : ImagesOf(prompt)) {
    bytes += '\x1f';
    bytes += img.uri;
  }
  return Digest(bytes);
}

std::string NowIso8601() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::size_t> Indices(const std::vector<RecordId>& ids) {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(id.index);
  return out;
}

class Harness {
 public:
  Harness(const ExperimentConfig& config, RunContext& ctx) : config_(config), ctx_(ctx) {
    config_.Validate();
    if (!ctx_.client) throw Error(ErrorKind::kConfig, "no generation client configured");
    templates_ = config_.templates_path.empty() ? DefaultTemplates()
                                                : LoadTemplates(config_.templates_path);
    templates_.probe.abstention_keyword = config_.abstention_keyword;
    prompt_ = templates_.prompt;
    const std::string axis(AxisName(config_.axis));
    if (config_.use_task_instruction) {
      auto it = templates_.task_instructions.find(axis);
      if (it == templates_.task_instructions.end()) {
        throw Error(ErrorKind::kConfig, "templates define no task instruction for " + axis);
      }
      prompt_.task_instruction = it->second;
    }
    LoadDataset();
  }

  MetricReport Run(const std::vector<Variant>& variants) {
    MetricReport report;
    report.metadata = Metadata();
    std::vector<Variant> order = variants;
    if (config_.axis == Axis::kInstruction &&
        std::find(order.begin(), order.end(), Variant::kZeroShot) == order.end()) {
      order.insert(order.begin(), Variant::kZeroShot);
      report.notices.push_back("instruction axis: added the zero_shot control cell");
    }
    if (config_.axis == Axis::kInstruction && !ctx_.judge) {
      report.notices.push_back("instruction axis skipped: no judge endpoint configured");
      return report;
    }
    for (Variant v : order) {
      for (int shots : ShotsFor(v, report)) {
        const CellKey key{std::string(AxisName(config_.axis)), std::string(VariantName(v)), shots};
        std::vector<SeedOutcome> outcomes;
        for (std::uint64_t seed : config_.seeds) {
          SeedOutcome out;
          try {
            out = RunSeed(v, shots, seed, key);
          } catch (const Error& e) {
            out.errors.push_back(e.what());
            out.failures = out.exchanges = 1;
            out.metrics.clear();
          }
          outcomes.push_back(std::move(out));
        }
        report.cells[key] = Combine(outcomes);
      }
    }
    return report;
  }

  void GenerateNegatives(const std::string& out_path) {
    if (config_.axis != Axis::kExplainability) {
      throw Error(ErrorKind::kConfig, "negatives are generated for the explainability axis");
    }
    const int shots = *std::max_element(config_.shots.begin(), config_.shots.end());
    const std::uint64_t seed = config_.seeds.front();
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(shots), size_ - 1);
    std::vector<WireRequest> requests;
    for (std::size_t i = 0; i < size_; ++i) {
      std::vector<std::size_t> candidates;
      for (std::size_t j = 0; j < size_; ++j) {
        if (j != i) candidates.push_back(j);
      }
      SplitRng rng = SplitRng::Derive(seed, kNegativesStream, i);
      const auto demos = DrawDemonstrations(candidates, labels_, n, {}, rng);
      requests.push_back({IclPrompt(i, demos), Params(Variant::kIcl)});
    }
    const auto outcomes = ctx_.client->GenerateAll(requests);
    std::string out;
    for (std::size_t i = 0; i < size_; ++i) {
      if (!outcomes[i].ok()) {
        throw Error(outcomes[i].error_kind.value_or(ErrorKind::kEndpoint),
                    "record " + std::to_string(i) + ": " + outcomes[i].error_message);
      }
      const std::string text = ParseAnswer(outcomes[i].exchange->output, StopMarkers());
      out += json{{"record_index", i}, {"image_id", ImageOf(i).id}, {"output", text}}.dump() +
             "\n";
    }
    WriteTextFile(out_path, out);
  }

 private:
  // -------------------------------------------------------------------------
  // Setup.

  void LoadDataset() {
    const std::string& path = config_.dataset_path;
    switch (config_.axis) {
      case Axis::kHallucination:
        if (!config_.vocab_path.empty()) {
          vocab_ = ObjectVocabulary::Load(config_.vocab_path, config_.exceptions_path);
        } else {
          vocab_ = ObjectVocabulary::Coco80();
        }
        captions_ = config_.instances_path.empty()
                        ? LoadCaptions(path, vocab_)
                        : LoadCocoCaptions(path, config_.instances_path, vocab_);
        labels_ = BalanceLabels<CaptionRecord>(captions_);
        break;
      case Axis::kAbstention:
        vqa_ = LoadVqa(path, config_.abstention_keyword);
        labels_ = BalanceLabels<VqaRecord>(vqa_);
        break;
      case Axis::kCompositionality:
        itm_ = LoadItm(path);
        labels_ = BalanceLabels<ItmRecord>(itm_);
        break;
      case Axis::kExplainability:
        explain_ = LoadExplanations(path);
        labels_ = BalanceLabels<ExplainRecord>(explain_);
        if (config_.negative_source == NegativeSource::kGenerationsFile &&
            !config_.negatives_path.empty()) {
          LoadNegatives();
        }
        break;
      case Axis::kInstruction:
        instructions_ = LoadInstructions(path);
        labels_ = BalanceLabels<InstructionRecord>(instructions_);
        if (!config_.judge_template_path.empty()) {
          judge_template_ = ReadTextFile(config_.judge_template_path);
        }
        break;
    }
    size_ = labels_.size();
    if (size_ == 0) throw Error(ErrorKind::kSize, "dataset '" + path + "' is empty");
  }

  void LoadNegatives() {
    const std::string text = ReadTextFile(config_.negatives_path);
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      const std::string_view line = Trim(std::string_view(text).substr(start, end - start));
      start = end + 1;
      ++line_no;
      if (line.empty()) continue;
      try {
        const json row = json::parse(line);
        const std::size_t idx = row.at("record_index").get<std::size_t>();
        if (idx >= explain_.size()) {
          throw Error(ErrorKind::kConsistency, "record_index out of range");
        }
        if (row.contains("image_id") && row["image_id"].get<std::string>() != explain_[idx].image.id) {
          throw Error(ErrorKind::kConsistency, "image_id does not match the dataset");
        }
        explain_[idx].negative_explanation = row.at("output").get<std::string>();
      } catch (const json::exception& e) {
        throw Error(ErrorKind::kParse, config_.negatives_path + ":" + std::to_string(line_no) +
                                           ": " + e.what());
      } catch (const Error& e) {
        throw Error(e.kind(), config_.negatives_path + ":" + std::to_string(line_no) + ": " +
                                  e.what());
      }
    }
  }

  ReportMetadata Metadata() const {
    ReportMetadata m;
    m.config_digest = Digest(CanonicalConfigJson(config_));
    m.endpoint_id = ctx_.client->endpoint_id();
    if (ctx_.judge) m.judge_endpoint_id = ctx_.judge->client().endpoint_id();
    for (auto s : config_.seeds) m.seeds.push_back(static_cast<std::int64_t>(s));
    m.chair_mode = config_.chair_mode == ChairGroundTruth::kInstances ? "instances"
                                                                      : "instances_and_references";
    m.cider_mode = std::string("cider-d n=4 sigma=6 idf=corpus ") +
                   (config_.cider_correct_only ? "correct-only" : "all");
    if (config_.record_timestamps) m.created_at = NowIso8601();
    return m;
  }

  std::vector<int> ShotsFor(Variant v, MetricReport& report) const {
    if (v == Variant::kZeroShot) return {0};
    std::vector<int> shots;
    for (int s : config_.shots) {
      if (s == 0 && (v == Variant::kCohIcl || v == Variant::kMtIcl)) {
        report.notices.push_back(std::string(VariantName(v)) +
                                 ": skipped 0 shots (needs at least one demonstration)");
        continue;
      }
      shots.push_back(s);
    }
    return shots;
  }

  BalancePolicy DemoPolicy() const {
    const BalancePolicy::Kind kind =
        config_.demo_balance.value_or(config_.axis == Axis::kCompositionality
                                          ? BalancePolicy::Kind::kByLabel
                                          : BalancePolicy::Kind::kNatural);
    if (kind == BalancePolicy::Kind::kNatural) return {};
    std::set<std::string> distinct(labels_.begin(), labels_.end());
    return BalancePolicy::Even({distinct.begin(), distinct.end()});
  }

  GenerationParams Params(Variant v) const {
    GenerationParams p;
    if (config_.params) {
      p = *config_.params;
    } else if (config_.axis == Axis::kInstruction) {
      p = GenerationParams::LongForm();
    } else if (config_.axis == Axis::kHallucination || config_.axis == Axis::kExplainability ||
               v == Variant::kMtIcl) {
      p = GenerationParams::Caption();
    } else {
      p = GenerationParams::ShortAnswer();
    }
    if (p.stop_sequences.empty()) p.stop_sequences = StopMarkers(v);
    return p;
  }

  std::vector<std::string> StopMarkers(Variant v = Variant::kIcl) const {
    std::vector<std::string> stops = {prompt_.chunk_end, prompt_.image_marker};
    const bool multi_line = config_.axis == Axis::kInstruction || v == Variant::kMtIcl;
    if (!multi_line) stops.push_back("\n");
    if (v == Variant::kCohIcl) stops.push_back(templates_.cues.coh_negative);
    return stops;
  }

  AnswerMode Mode() const {
    return config_.axis == Axis::kAbstention ? AnswerMode::kVqa : AnswerMode::kVerbatim;
  }

  const ImageRef& ImageOf(std::size_t i) const {
    switch (config_.axis) {
      case Axis::kHallucination: return captions_[i].image;
      case Axis::kAbstention: return vqa_[i].image;
      case Axis::kCompositionality: return itm_[i].image;
      case Axis::kExplainability: return explain_[i].image;
      case Axis::kInstruction: return instructions_[i].image;
    }
    throw Error(ErrorKind::kConfig, "unknown axis");
  }

  // -------------------------------------------------------------------------
  // Per-axis text slots.

  std::string QueryText(std::size_t i) const {
    const TaskCues& c = templates_.cues;
    switch (config_.axis) {
      case Axis::kHallucination: return c.caption;
      case Axis::kAbstention: return Fill(c.vqa, {{"question", vqa_[i].question}});
      case Axis::kCompositionality: return Fill(c.itm, {{"caption", itm_[i].caption}});
      case Axis::kExplainability:
        return Fill(c.explain, {{"question", explain_[i].question}, {"answer", explain_[i].answer}});
      case Axis::kInstruction:
        return Fill(c.instruction, {{"instruction", instructions_[i].instruction}});
    }
    return {};
  }

  std::string Response(std::size_t i) const {
    switch (config_.axis) {
      case Axis::kHallucination: return captions_[i].references.front();
      case Axis::kAbstention: return vqa_[i].answer;
      case Axis::kCompositionality:
        return itm_[i].label == ItmLabel::kPositive ? templates_.cues.itm_yes
                                                    : templates_.cues.itm_no;
      case Axis::kExplainability: return explain_[i].explanations.front();
      case Axis::kInstruction: return instructions_[i].gt_response;
    }
    return {};
  }

  Demonstration Demo(std::size_t i) const { return {ImageOf(i), QueryText(i), Response(i)}; }

  MultitaskDemonstration MtDemo(std::size_t i) const {
    const TaskCues& c = templates_.cues;
    switch (config_.axis) {
      case Axis::kHallucination:
        return {ImageOf(i), c.caption, captions_[i].references.front(), c.objects,
                Join({captions_[i].gt_objects.begin(), captions_[i].gt_objects.end()}, ", ")};
      case Axis::kAbstention:
        return {ImageOf(i), Fill(c.vqa, {{"question", vqa_[i].question}}), vqa_[i].answer,
                c.relevance, vqa_[i].absurd ? templates_.probe.r2_no : templates_.probe.r2_yes};
      case Axis::kExplainability:
        return {ImageOf(i), Fill(c.vqa, {{"question", explain_[i].question}}),
                explain_[i].answer, c.because, explain_[i].explanations.front()};
      default:
        throw Error(ErrorKind::kConfig, "no auxiliary task for this axis");
    }
  }

  std::string MtCue() const {
    switch (config_.axis) {
      case Axis::kHallucination: return templates_.cues.objects;
      case Axis::kAbstention: return templates_.cues.relevance;
      default: return templates_.cues.because;
    }
  }

  CohDemonstration CohDemo(std::size_t i) const {
    const ExplainRecord& r = explain_[i];
    return {ImageOf(i),
            Fill(templates_.cues.explain_context, {{"question", r.question}, {"answer", r.answer}}),
            templates_.cues.coh_positive,
            r.explanations.front(),
            templates_.cues.coh_negative,
            *r.negative_explanation};
  }

  InterleavedPrompt IclPrompt(std::size_t q, const std::vector<std::size_t>& demos) const {
    std::vector<Demonstration> d;
    for (std::size_t i : demos) d.push_back(Demo(i));
    return AssembleIcl(d, ImageOf(q), QueryText(q), prompt_);
  }

  InterleavedPrompt BuildPrompt(Variant v, std::size_t q,
                                const std::vector<std::size_t>& demos) const {
    switch (v) {
      case Variant::kZeroShot: {
        std::vector<Demonstration> d;
        for (std::size_t i : demos) d.push_back(Demo(i));
        return AssembleZeroShot(d, ImageOf(q), QueryText(q), prompt_);
      }
      case Variant::kIcl:
      case Variant::kScIcl:
        return IclPrompt(q, demos);
      case Variant::kMtIcl: {
        std::vector<MultitaskDemonstration> d;
        for (std::size_t i : demos) d.push_back(MtDemo(i));
        return AssembleMultitask(d, ImageOf(q), MtDemo(q).t1, prompt_);
      }
      case Variant::kCohIcl: {
        std::vector<CohDemonstration> d;
        for (std::size_t i : demos) d.push_back(CohDemo(i));
        const ExplainRecord& r = explain_[q];
        return AssembleCoh(
            d, ImageOf(q),
            Fill(templates_.cues.explain_context, {{"question", r.question}, {"answer", r.answer}}),
            templates_.cues.coh_positive, prompt_);
      }
    }
    throw Error(ErrorKind::kConfig, "unknown variant");
  }

  // -------------------------------------------------------------------------
  // One (cell, seed).

  SampledSplit Split(std::uint64_t seed) const {
    if (config_.n_queries >= size_) {
      throw Error(ErrorKind::kSize, "n_queries (" + std::to_string(config_.n_queries) +
                                        ") must be smaller than the dataset (" +
                                        std::to_string(size_) + " records)");
    }
    return SampleSplit(AxisName(config_.axis), std::span<const std::string>(labels_),
                       config_.n_queries, seed, DemoPolicy());
  }

  std::vector<std::size_t> DrawFor(Variant v, int shots, std::uint64_t seed, std::size_t q,
                                   const std::vector<std::size_t>& pool) const {
    const std::size_t n = v == Variant::kZeroShot ? 2 : static_cast<std::size_t>(shots);
    const std::uint64_t stream =
        (v == Variant::kZeroShot ? kZeroShotStream : kDemoStream) + static_cast<std::uint64_t>(shots);
    SplitRng rng = SplitRng::Derive(seed, stream, q);
    if (config_.axis == Axis::kInstruction) {
      // Demonstrations share the query's instruction type.
      BalancePolicy same_type;
      same_type.kind = BalancePolicy::Kind::kByLabel;
      same_type.targets[labels_[q]] = 1.0;
      return DrawDemonstrations(pool, labels_, n, same_type, rng);
    }
    return DrawDemonstrations(pool, labels_, n, DemoPolicy(), rng);
  }

  void Log(const CellKey& key, std::uint64_t seed, std::size_t q,
           std::vector<std::string> digests, std::vector<std::string> outputs,
           std::string parsed, std::vector<std::string> flags) {
    if (!ctx_.log) return;
    RunRecord r;
    r.cell = key;
    r.seed = seed;
    r.record_index = q;
    r.image_id = ImageOf(q).id;
    r.prompt_digests = std::move(digests);
    r.outputs = std::move(outputs);
    r.parsed = std::move(parsed);
    r.flags = std::move(flags);
    ctx_.log->Append(r);
  }

  static void CountFailures(const std::vector<ExchangeOutcome>& outcomes, SeedOutcome& out) {
    for (const auto& o : outcomes) {
      ++out.exchanges;
      if (o.ok()) continue;
      ++out.failures;
      ++out.diagnostics["failed_exchanges"];
      std::string msg = o.error_message;
      if (o.error_kind == ErrorKind::kCapacity) ++out.diagnostics["capacity_errors"];
      if (std::find(out.errors.begin(), out.errors.end(), msg) == out.errors.end() &&
          out.errors.size() < 5) {
        out.errors.push_back(std::move(msg));
      }
    }
  }

  SeedOutcome RunSeed(Variant v, int shots, std::uint64_t seed, const CellKey& key) {
    SeedOutcome out;
    const SampledSplit split = Split(seed);
    const std::vector<std::size_t> queries = Indices(split.queries);
    std::vector<std::size_t> pool = Indices(split.demo_pool);
    if (v == Variant::kCohIcl) {
      const std::size_t before = pool.size();
      std::erase_if(pool, [&](std::size_t i) { return !explain_[i].negative_explanation; });
      out.diagnostics["coh_pool_without_negative"] = static_cast<std::int64_t>(before - pool.size());
    }

    std::vector<WireRequest> requests;
    requests.reserve(queries.size());
    for (std::size_t q : queries) {
      requests.push_back({BuildPrompt(v, q, DrawFor(v, shots, seed, q, pool)), Params(v)});
    }
    const auto outcomes = ctx_.client->GenerateAll(requests);
    CountFailures(outcomes, out);

    std::vector<std::string> raw(queries.size());
    for (std::size_t k = 0; k < queries.size(); ++k) {
      if (outcomes[k].ok()) raw[k] = outcomes[k].exchange->output;
    }

    // Main-task predictions (and auxiliary outputs for multitask prompts).
    std::vector<std::string> preds(queries.size());
    std::vector<std::string> aux(queries.size());
    std::vector<std::vector<std::string>> flags(queries.size());
    for (std::size_t k = 0; k < queries.size(); ++k) {
      if (!outcomes[k].ok()) flags[k].push_back("exchange_failed");
      if (v == Variant::kMtIcl) {
        const std::string body = ParseAnswer(raw[k], StopMarkers(v));
        const MultitaskOutput split_out = SplitMultitask(body, MtCue());
        preds[k] = ParseAnswer(split_out.r1, std::vector<std::string>{"\n"}, Mode());
        aux[k] = split_out.r2;
        if (!split_out.cue_found && outcomes[k].ok()) {
          flags[k].push_back("cue_missing");
          ++out.diagnostics["cue_missing"];
        }
      } else {
        preds[k] = ParseAnswer(raw[k], StopMarkers(v), Mode());
      }
    }

    if (v == Variant::kScIcl) {
      ScoreAxis(v, queries, preds, aux, flags, out, "pre_");
      SelfCorrect(shots, seed, queries, split, preds, flags, out);
    }
    if (config_.axis == Axis::kInstruction) {
      JudgeResponses(queries, preds, flags, out);
    } else {
      ScoreAxis(v, queries, preds, aux, flags, out, "");
    }

    for (std::size_t k = 0; k < queries.size(); ++k) {
      std::vector<std::string> digests{PromptDigest(requests[k].prompt, prompt_)};
      std::vector<std::string> outputs{raw[k]};
      if (k < probe_digests_.size()) {
        digests.push_back(probe_digests_[k]);
        outputs.push_back(probe_outputs_[k]);
      }
      Log(key, seed, queries[k], std::move(digests), std::move(outputs), preds[k],
          std::move(flags[k]));
    }
    probe_digests_.clear();
    probe_outputs_.clear();
    return out;
  }

  void SelfCorrect(int shots, std::uint64_t seed, const std::vector<std::size_t>& queries,
                   const SampledSplit& split, std::vector<std::string>& preds,
                   std::vector<std::vector<std::string>>& flags, SeedOutcome& out) {
    (void)shots;
    const std::vector<std::size_t> pool = Indices(split.demo_pool);
    const BalancePolicy policy =
        config_.sc_balanced ? BalancePolicy::Even({"absurd", "relevant"}) : BalancePolicy{};
    const auto n = static_cast<std::size_t>(config_.sc_correction_shots);
    std::vector<WireRequest> probes;
    for (std::size_t q : queries) {
      SplitRng rng = SplitRng::Derive(seed, kProbeStream + n, q);
      std::vector<RelevanceExample> demos;
      for (std::size_t i : DrawDemonstrations(pool, labels_, n, policy, rng)) {
        demos.push_back({vqa_[i].image, vqa_[i].question, !vqa_[i].absurd});
      }
      probes.push_back({AssembleSelfCorrection(demos, templates_.probe, vqa_[q].image,
                                               vqa_[q].question, prompt_),
                        Params(Variant::kScIcl)});
    }
    const auto outcomes = ctx_.client->GenerateAll(probes);
    CountFailures(outcomes, out);
    std::int64_t corrected = 0;
    std::int64_t unparsed = 0;
    for (std::size_t k = 0; k < queries.size(); ++k) {
      const std::string reply = outcomes[k].ok() ? outcomes[k].exchange->output : "";
      probe_digests_.push_back(PromptDigest(probes[k].prompt, prompt_));
      probe_outputs_.push_back(reply);
      const Correction c =
          CorrectAnswer(preds[k], ParseAnswer(reply, StopMarkers()), templates_.probe);
      if (c.probe_unparsed) {
        ++unparsed;
        flags[k].push_back("probe_unparsed");
      }
      if (c.corrected) {
        ++corrected;
        flags[k].push_back("corrected");
      }
      preds[k] = c.answer;
    }
    out.diagnostics["probe_unparsed"] = unparsed;
    out.diagnostics["corrected"] = corrected;
  }

  void JudgeResponses(const std::vector<std::size_t>& queries,
                      const std::vector<std::string>& preds,
                      std::vector<std::vector<std::string>>& flags, SeedOutcome& out) {
    Judge& judge = *ctx_.judge;
    std::vector<WireRequest> requests;
    for (std::size_t k = 0; k < queries.size(); ++k) {
      const InstructionRecord& r = instructions_[queries[k]];
      requests.push_back(judge.Request(preds[k], r.gt_response, r.instruction));
      if (judge_template_) {
        requests.back().prompt.segments.front() = Segment::Text(
            RenderJudgePrompt(*judge_template_, r.instruction, r.gt_response, preds[k]));
      }
    }
    const auto outcomes = judge.client().GenerateAll(requests);
    CountFailures(outcomes, out);
    double total = 0.0;
    double candidate_sum = 0.0;
    double reference_sum = 0.0;
    bool all_have_reference = true;
    std::map<std::string, std::pair<double, std::size_t>> per_type;
    for (std::size_t k = 0; k < queries.size(); ++k) {
      double score = 0.0;
      if (outcomes[k].ok()) {
        try {
          const JudgeVerdict v = ParseJudgeReply(outcomes[k].exchange->output);
          score = v.score;
          if (v.reference_score) {
            reference_sum += *v.reference_score;
            candidate_sum += v.score;
          } else {
            all_have_reference = false;
          }
        } catch (const Error&) {
          ++out.failures;
          ++out.diagnostics["judge_unparsed"];
          flags[k].push_back("judge_unparsed");
          all_have_reference = false;
        }
      } else {
        all_have_reference = false;
      }
      total += score;
      auto& [sum, count] = per_type[labels_[queries[k]]];
      sum += score;
      ++count;
    }
    const double n = static_cast<double>(queries.size());
    // Judge scores are 0-10; scale to 0-100 like every other metric.
    out.metrics["judge_score"] = total / n * 10.0;
    if (all_have_reference && reference_sum > 0.0) {
      out.metrics["relative_score"] = candidate_sum / reference_sum * kPercent;
    }
    for (const auto& [type, sc] : per_type) {
      out.breakdowns["itype"][type] = sc.first / static_cast<double>(sc.second) * 10.0;
    }
  }

  void ScoreAxis(Variant v, const std::vector<std::size_t>& queries,
                 const std::vector<std::string>& preds, const std::vector<std::string>& aux,
                 std::vector<std::vector<std::string>>& flags, SeedOutcome& out,
                 const std::string& prefix) {
    switch (config_.axis) {
      case Axis::kHallucination: {
        std::vector<ChairInput> inputs;
        std::vector<std::vector<std::string>> refs;
        for (std::size_t k = 0; k < queries.size(); ++k) {
          const CaptionRecord& r = captions_[queries[k]];
          inputs.push_back({preds[k], r.gt_objects, r.references});
          refs.push_back(r.references);
        }
        const ChairResult chair = Chair(inputs, vocab_, config_.chair_mode);
        out.metrics[prefix + "chair_s"] = chair.chair_s * kPercent;
        out.metrics[prefix + "chair_i"] = chair.chair_i * kPercent;
        out.metrics[prefix + "cider"] = Cider(preds, refs).score * kPercent;
        for (std::size_t k = 0; k < queries.size(); ++k) {
          if (!chair.per_caption[k].hallucinated.empty()) flags[k].push_back("hallucination");
        }
        break;
      }
      case Axis::kAbstention: {
        std::vector<VqaRecord> records;
        for (std::size_t q : queries) records.push_back(vqa_[q]);
        const AbstentionResult r = AbstentionMetrics(preds, records, config_.abstention_keyword);
        out.metrics[prefix + "overall_acc"] = r.overall_acc * kPercent;
        out.metrics[prefix + "abst_acc"] = r.abst_acc * kPercent;
        out.metrics[prefix + "abst_precision"] = r.abst_precision * kPercent;
        out.metrics[prefix + "abst_recall"] = r.abst_recall * kPercent;
        out.metrics[prefix + "abst_f1"] = r.abst_f1 * kPercent;
        if (r.degenerate) out.metric_flags[prefix + "abst_f1"].insert("degenerate_f1");
        if (prefix.empty()) {
          for (const auto& [type, acc] : r.per_type_acc) out.breakdowns["qtype"][type] = acc * kPercent;
        }
        break;
      }
      case Axis::kCompositionality: {
        std::vector<YesNo> verdicts;
        std::vector<ItmRecord> records;
        for (std::size_t k = 0; k < queries.size(); ++k) {
          verdicts.push_back(ParseYesNo(preds[k]));
          if (verdicts.back() == YesNo::kUnknown) {
            ++out.diagnostics["verdict_unknown"];
            flags[k].push_back("verdict_unknown");
          }
          records.push_back(itm_[queries[k]]);
        }
        const ItmResult r = ItmAccuracy(verdicts, std::span<const ItmRecord>(records));
        out.metrics[prefix + "itm_acc"] = r.accuracy * kPercent;
        for (const auto& [kind, acc] : r.per_kind) out.breakdowns["negative_kind"][kind] = acc * kPercent;
        break;
      }
      case Axis::kExplainability: {
        std::vector<std::string> candidates;
        std::vector<std::vector<std::string>> refs;
        if (v == Variant::kMtIcl) {
          std::vector<std::string> answers;
          for (std::size_t q : queries) answers.push_back(explain_[q].answer);
          out.metrics[prefix + "vqa_acc"] = ExactMatchAccuracy(preds, answers) * kPercent;
          for (std::size_t k = 0; k < queries.size(); ++k) {
            const bool correct = NormalizeAnswer(preds[k]) == NormalizeAnswer(answers[k]);
            if (config_.cider_correct_only && !correct) continue;
            candidates.push_back(aux[k]);
            refs.push_back(explain_[queries[k]].explanations);
          }
        } else {
          for (std::size_t k = 0; k < queries.size(); ++k) {
            candidates.push_back(preds[k]);
            refs.push_back(explain_[queries[k]].explanations);
          }
        }
        out.diagnostics["cider_scored"] = static_cast<std::int64_t>(candidates.size());
        out.metrics[prefix + "cider"] =
            candidates.empty() ? 0.0 : Cider(candidates, refs).score * kPercent;
        if (candidates.empty()) out.metric_flags[prefix + "cider"].insert("no_scored_items");
        break;
      }
      case Axis::kInstruction:
        break;
    }
  }

  ReportCell Combine(const std::vector<SeedOutcome>& outcomes) const {
    ReportCell cell;
    std::map<std::string, std::vector<double>> metric_values;
    std::map<std::string, std::map<std::string, std::vector<double>>> breakdown_values;
    std::map<std::string, std::set<std::string>> flags;
    std::size_t exchanges = 0;
    std::size_t failures = 0;
    for (const auto& o : outcomes) {
      for (const auto& [name, v] : o.metrics) metric_values[name].push_back(v);
      for (const auto& [family, entries] : o.breakdowns) {
        for (const auto& [k, v] : entries) breakdown_values[family][k].push_back(v);
      }
      for (const auto& [name, f] : o.metric_flags) flags[name].insert(f.begin(), f.end());
      for (const auto& [name, d] : o.diagnostics) cell.diagnostics[name] += d;
      for (const auto& e : o.errors) {
        if (std::find(cell.errors.begin(), cell.errors.end(), e) == cell.errors.end()) {
          cell.errors.push_back(e);
        }
      }
      exchanges += o.exchanges;
      failures += o.failures;
    }
    auto to_value = [](const std::vector<double>& values, const std::set<std::string>& extra) {
      const Aggregate a = AggregateScores(values);
      MetricValue v{a.mean, a.std, a.n, {extra.begin(), extra.end()}};
      if (a.single_sample) v.flags.push_back("single_seed");
      return v;
    };
    for (const auto& [name, values] : metric_values) cell.metrics[name] = to_value(values, flags[name]);
    for (const auto& [family, entries] : breakdown_values) {
      for (const auto& [k, values] : entries) cell.breakdowns[family][k] = to_value(values, {});
    }
    cell.diagnostics["exchanges"] = static_cast<std::int64_t>(exchanges);
    const double failed_fraction =
        exchanges == 0 ? 1.0 : static_cast<double>(failures) / static_cast<double>(exchanges);
    cell.valid = failed_fraction <= config_.invalid_threshold && !metric_values.empty();
    return cell;
  }

  ExperimentConfig config_;
  RunContext& ctx_;
  TemplateSet templates_;
  PromptTemplate prompt_;
  ObjectVocabulary vocab_;
  std::optional<std::string> judge_template_;

  std::vector<CaptionRecord> captions_;
  std::vector<VqaRecord> vqa_;
  std::vector<ItmRecord> itm_;
  std::vector<ExplainRecord> explain_;
  std::vector<InstructionRecord> instructions_;
  std::vector<std::string> labels_;
  std::size_t size_ = 0;

  // Self-correction probe traffic for the run log of the current seed.
  std::vector<std::string> probe_digests_;
  std::vector<std::string> probe_outputs_;
};

std::vector<Variant> Only(const ExperimentConfig& config, Variant v) {
  std::vector<Variant> out;
  for (Variant x : config.variants) {
    if (x == v) out.push_back(x);
  }
  if (out.empty()) out.push_back(v);
  return out;
}

MetricReport Finish(MetricReport report, RunContext& ctx) {
  if (ctx.log) ctx.log->AppendReport(report);
  return report;
}

}  // namespace

MetricReport RunAxis(const ExperimentConfig& config, RunContext& ctx) {
  Harness harness(config, ctx);
  return Finish(harness.Run(config.variants), ctx);
}

MetricReport RunSelfCorrection(const ExperimentConfig& config, RunContext& ctx) {
  if (config.axis != Axis::kAbstention) {
    throw Error(ErrorKind::kConfig, "self-correction runs on the abstention axis");
  }
  Harness harness(config, ctx);
  return Finish(harness.Run(Only(config, Variant::kScIcl)), ctx);
}

MetricReport RunChainOfHindsight(const ExperimentConfig& config, RunContext& ctx) {
  ExperimentConfig c = config;
  if (std::find(c.variants.begin(), c.variants.end(), Variant::kCohIcl) == c.variants.end()) {
    c.variants.push_back(Variant::kCohIcl);
  }
  Harness harness(c, ctx);
  return Finish(harness.Run(Only(c, Variant::kCohIcl)), ctx);
}

MetricReport RunInstructionAxis(const ExperimentConfig& config, RunContext& ctx) {
  if (config.axis != Axis::kInstruction) {
    throw Error(ErrorKind::kConfig, "expected the instruction axis");
  }
  Harness harness(config, ctx);
  return Finish(harness.Run(config.variants), ctx);
}

void GenerateNegatives(const ExperimentConfig& config, RunContext& ctx,
                       const std::string& out_path) {
  ExperimentConfig c = config;
  // Negatives are produced with plain ICL whatever variants the config names.
  c.variants = {Variant::kIcl};
  Harness harness(c, ctx);
  harness.GenerateNegatives(out_path);
}

}  // namespace evalign
