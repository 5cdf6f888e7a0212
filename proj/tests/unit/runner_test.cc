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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "evalign/corpus.h"
#include "evalign/error.h"
#include "evalign/modelio.h"
#include "evalign/report.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace evalign {
namespace {

namespace fs = std::filesystem;
using testing::DataPath;

ExperimentConfig Config(const std::string& json) {
  return ParseConfig(json, DataPath("."));
}

RunContext Context(std::shared_ptr<Client> client, std::shared_ptr<Judge> judge = nullptr,
                   RunLog* log = nullptr) {
  RunContext ctx;
  ctx.client = std::move(client);
  ctx.judge = std::move(judge);
  ctx.log = log;
  return ctx;
}

std::shared_ptr<Client> ScriptClient(const std::string& script) {
  return std::make_shared<Client>(
      std::make_shared<ScriptedTransport>(MockScript::Parse(script)));
}

std::shared_ptr<Client> FixedClient(const std::string& reply) {
  return ScriptClient(R"({"rules": [], "default": ")" + reply + R"("})");
}

// Records every request body before forwarding it.
class RecordingTransport : public Transport {
 public:
  explicit RecordingTransport(std::shared_ptr<Transport> inner) : inner_(std::move(inner)) {}

  TransportReply Send(std::string_view body) override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      bodies_.emplace_back(body);
    }
    return inner_->Send(body);
  }
  std::string id() const override { return inner_->id(); }

  std::vector<std::string> bodies() const {
    std::lock_guard<std::mutex> lock(mu_);
    return bodies_;
  }

 private:
  std::shared_ptr<Transport> inner_;
  mutable std::mutex mu_;
  std::vector<std::string> bodies_;
};

std::string TempPath(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "evalign_runner_test";
  fs::create_directories(dir);
  return (dir / name).string();
}

void ExpectConfigError(const std::string& json) {
  try {
    Config(json);
    ADD_FAILURE() << "accepted: " << json;
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig) << json << ": " << e.what();
  }
}

// ---------------------------------------------------------------------------
// Configuration.

TEST(ConfigTest, ParsesAndResolvesRelativePaths) {
  const ExperimentConfig c = LoadConfig(DataPath("configs/abstention.json"));
  EXPECT_EQ(c.axis, Axis::kAbstention);
  EXPECT_EQ(c.variants.size(), 4u);
  EXPECT_EQ(c.n_queries, 60u);
  EXPECT_EQ(c.sc_correction_shots, 8);
  EXPECT_TRUE(fs::exists(c.dataset_path)) << c.dataset_path;
}

TEST(ConfigTest, RejectsInvalidDocuments) {
  ExpectConfigError("not json");
  ExpectConfigError("[]");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "bogus": 1})");
  ExpectConfigError(R"({"axis": "weather", "dataset": "x"})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "variants": ["fancy"]})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "variants": []})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "variants": ["icl", "icl"]})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "shots": []})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "shots": [-1]})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "seeds": []})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "seeds": [1, 1]})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "n_queries": 0})");
  ExpectConfigError(R"({"axis": "abstention"})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "invalid_threshold": 2})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "demo_balance": "odd"})");
  ExpectConfigError(
      R"({"axis": "abstention", "dataset": "x", "params": {"max_new_tokens": 0}})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "params": {"beam": 4}})");
}

TEST(ConfigTest, RejectsUnsupportedVariantAxisCombinations) {
  ExpectConfigError(R"({"axis": "hallucination", "dataset": "x", "variants": ["sc_icl"]})");
  ExpectConfigError(R"({"axis": "abstention", "dataset": "x", "variants": ["coh_icl"],
                        "negative_source": "provided_field"})");
  ExpectConfigError(R"({"axis": "explainability", "dataset": "x", "variants": ["coh_icl"]})");
  ExpectConfigError(R"({"axis": "explainability", "dataset": "x", "variants": ["coh_icl"],
                        "negative_source": "generations_file"})");
  ExpectConfigError(R"({"axis": "compositionality", "dataset": "x", "variants": ["mt_icl"]})");
  ExpectConfigError(R"({"axis": "instruction", "dataset": "x", "variants": ["mt_icl"]})");
}

TEST(ConfigTest, CanonicalJsonIgnoresEndpointsAndDirectories) {
  ExperimentConfig a = LoadConfig(DataPath("configs/abstention.json"));
  ExperimentConfig b = a;
  b.endpoint = EndpointSettings();
  b.endpoint->url = "http://localhost:1";
  b.dataset_path = "/elsewhere/tdiuc_100.jsonl";
  EXPECT_EQ(CanonicalConfigJson(a), CanonicalConfigJson(b));
  b.n_queries = 61;
  EXPECT_NE(CanonicalConfigJson(a), CanonicalConfigJson(b));
}

TEST(ConfigTest, NamesRoundTrip) {
  for (Axis a : {Axis::kHallucination, Axis::kAbstention, Axis::kCompositionality,
                 Axis::kExplainability, Axis::kInstruction}) {
    EXPECT_EQ(ParseAxis(AxisName(a)), a);
  }
  for (Variant v : {Variant::kZeroShot, Variant::kIcl, Variant::kCohIcl, Variant::kScIcl,
                    Variant::kMtIcl}) {
    EXPECT_EQ(ParseVariant(VariantName(v)), v);
  }
  EXPECT_FALSE(ParseAxis("nope"));
}

TEST(RunAxisTest, RequiresClient) {
  RunContext ctx;
  try {
    RunAxis(LoadConfig(DataPath("configs/abstention.json")), ctx);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(RunAxisTest, QueryCountMustLeaveADemoPool) {
  ExperimentConfig c = LoadConfig(DataPath("configs/abstention.json"));
  c.variants = {Variant::kIcl};
  c.shots = {2};
  c.n_queries = 100;
  RunContext ctx = Context(FixedClient("red"));
  const MetricReport r = RunAxis(c, ctx);
  const ReportCell& cell = r.cells.at({"abstention", "icl", 2});
  EXPECT_FALSE(cell.valid);
  ASSERT_FALSE(cell.errors.empty());
  EXPECT_NE(cell.errors.front().find("n_queries"), std::string::npos);
}

// ---------------------------------------------------------------------------
// Abstention.

TEST(AbstentionRunTest, AlwaysAbstainingMatchesAbsurdFraction) {
  ExperimentConfig c = LoadConfig(DataPath("configs/abstention.json"));
  c.variants = {Variant::kIcl};
  c.shots = {4};
  RunLog log;
  RunContext ctx = Context(FixedClient("doesnotapply"), nullptr, &log);
  const MetricReport r = RunAxis(c, ctx);
  const auto vqa = LoadVqa(c.dataset_path);

  std::map<std::uint64_t, std::pair<double, double>> per_seed;  // absurd, total
  for (const RunRecord& rec : log.Records()) {
    auto& [absurd, total] = per_seed[rec.seed];
    absurd += vqa.at(rec.record_index).absurd ? 1.0 : 0.0;
    total += 1.0;
  }
  ASSERT_EQ(per_seed.size(), 3u);
  std::vector<double> acc;
  for (const auto& [seed, counts] : per_seed) {
    EXPECT_EQ(counts.second, 60.0);
    acc.push_back(counts.first / counts.second * 100.0);
  }
  const auto [mean, sd] = oracle::MeanStd(acc);
  const ReportCell& cell = r.cells.at({"abstention", "icl", 4});
  EXPECT_TRUE(cell.valid);
  EXPECT_NEAR(cell.metrics.at("overall_acc").mean, mean, 1e-9);
  EXPECT_NEAR(cell.metrics.at("overall_acc").std, sd, 1e-9);
  EXPECT_NEAR(cell.metrics.at("abst_recall").mean, 100.0, 1e-9);
  EXPECT_NEAR(cell.metrics.at("abst_precision").mean, mean, 1e-9);
}

TEST(AbstentionRunTest, CellsCoverGridWithOneValuePerSeed) {
  ExperimentConfig c = LoadConfig(DataPath("configs/abstention.json"));
  c.variants = {Variant::kZeroShot, Variant::kIcl, Variant::kMtIcl};
  c.shots = {0, 2};
  c.n_queries = 20;
  RunContext ctx = Context(FixedClient("red"));
  const MetricReport r = RunAxis(c, ctx);
  std::set<CellKey> keys;
  for (const auto& [k, cell] : r.cells) keys.insert(k);
  const std::set<CellKey> want = {{"abstention", "zero_shot", 0},
                                  {"abstention", "icl", 0},
                                  {"abstention", "icl", 2},
                                  {"abstention", "mt_icl", 2}};
  EXPECT_EQ(keys, want);
  for (const auto& [k, cell] : r.cells) {
    for (const auto& [name, v] : cell.metrics) EXPECT_EQ(v.n, 3u) << name;
    EXPECT_EQ(cell.diagnostics.at("exchanges"), 60);
  }
  EXPECT_EQ(r.metadata.seeds, (std::vector<std::int64_t>{13, 17, 19}));
  ASSERT_FALSE(r.notices.empty());
}

TEST(AbstentionRunTest, Deterministic) {
  ExperimentConfig c = LoadConfig(DataPath("configs/abstention.json"));
  c.n_queries = 30;
  auto run = [&] {
    RunContext ctx = Context(std::make_shared<Client>(std::make_shared<ScriptedTransport>(
        MockScript::Load(DataPath("mocks/suite.json")))));
    return ToJson(RunAxis(c, ctx));
  };
  EXPECT_EQ(run(), run());
}

TEST(AbstentionRunTest, QueriesNeverAppearAsTheirOwnDemonstrations) {
  ExperimentConfig c = LoadConfig(DataPath("configs/abstention.json"));
  c.variants = {Variant::kIcl};
  c.shots = {8};
  c.n_queries = 40;
  auto recorder = std::make_shared<RecordingTransport>(
      std::make_shared<ScriptedTransport>(MockScript::Parse(R"({"default": "red"})")));
  RunLog log;
  RunContext ctx = Context(std::make_shared<Client>(recorder), nullptr, &log);
  RunAxis(c, ctx);

  // Per seed the queries are distinct records.
  std::map<std::uint64_t, std::set<std::size_t>> queries;
  for (const RunRecord& rec : log.Records()) {
    EXPECT_TRUE(queries[rec.seed].insert(rec.record_index).second);
  }
  for (const auto& [seed, q] : queries) EXPECT_EQ(q.size(), 40u);

  // Demonstration images come from the pool, never from the query set.
  const auto bodies = recorder->bodies();
  ASSERT_EQ(bodies.size(), 120u);
  std::map<std::uint64_t, std::set<std::string>> query_images;
  const auto vqa = LoadVqa(c.dataset_path);
  for (const auto& [seed, q] : queries) {
    for (std::size_t i : q) query_images[seed].insert(vqa[i].image.uri);
  }
  for (const std::string& body : bodies) {
    const WireRequest req = DecodeRequest(body);
    const auto images = ImagesOf(req.prompt);
    ASSERT_EQ(images.size(), 9u);
    const std::string query_image = images.back().uri;
    std::uint64_t seed = 0;
    for (const auto& [s, imgs] : query_images) {
      if (imgs.count(query_image)) seed = s;
    }
    ASSERT_NE(seed, 0u);
    // Query sets of different seeds overlap, so check against the union of
    // seeds whose query set contains this image.
    bool some_seed_disjoint = false;
    for (const auto& [s, imgs] : query_images) {
      if (!imgs.count(query_image)) continue;
      bool disjoint = true;
      for (std::size_t k = 0; k + 1 < images.size(); ++k) {
        if (imgs.count(images[k].uri)) disjoint = false;
      }
      some_seed_disjoint = some_seed_disjoint || disjoint;
    }
    EXPECT_TRUE(some_seed_disjoint);
  }
}

TEST(SelfCorrectionRunTest, CellCarriesPreCorrectionMetrics) {
  ExperimentConfig c = LoadConfig(DataPath("configs/abstention.json"));
  c.shots = {2};
  c.n_queries = 30;
  c.sc_correction_shots = 4;
  RunLog log;
  RunContext ctx = Context(std::make_shared<Client>(std::make_shared<ScriptedTransport>(
                     MockScript::Load(DataPath("mocks/sc_direction.json")))),
                 nullptr, &log);
  const MetricReport r = RunSelfCorrection(c, ctx);
  ASSERT_EQ(r.cells.size(), 1u);
  const ReportCell& cell = r.cells.at({"abstention", "sc_icl", 2});
  EXPECT_TRUE(cell.metrics.count("pre_abst_f1"));
  EXPECT_TRUE(cell.metrics.count("abst_f1"));
  EXPECT_GT(cell.diagnostics.at("corrected"), 0);
  EXPECT_EQ(cell.diagnostics.at("probe_unparsed"), 0);
  EXPECT_EQ(cell.diagnostics.at("exchanges"), 2 * 30 * 3);
  for (const RunRecord& rec : log.Records()) EXPECT_EQ(rec.outputs.size(), 2u);
}

// ---------------------------------------------------------------------------
// Hallucination.

TEST(HallucinationRunTest, ObjectFreeCaptionHasNoHallucination) {
  ExperimentConfig c = LoadConfig(DataPath("configs/hallucination.json"));
  c.variants = {Variant::kIcl};
  c.shots = {2};
  RunContext ctx = Context(FixedClient("a photo taken outside"));
  const MetricReport r = RunAxis(c, ctx);
  const ReportCell& cell = r.cells.at({"hallucination", "icl", 2});
  EXPECT_TRUE(cell.valid);
  EXPECT_EQ(cell.metrics.at("chair_s").mean, 0.0);
  EXPECT_EQ(cell.metrics.at("chair_i").mean, 0.0);
  EXPECT_EQ(r.metadata.chair_mode, "instances");
}

TEST(HallucinationRunTest, ForeignObjectIsAlwaysAHallucination) {
  ExperimentConfig c = LoadConfig(DataPath("configs/hallucination.json"));
  c.variants = {Variant::kZeroShot};
  const auto captions = LoadCaptions(c.dataset_path, ObjectVocabulary::Coco80());
  bool any_toaster = false;
  for (const auto& rec : captions) any_toaster = any_toaster || rec.gt_objects.count("toaster");
  ASSERT_FALSE(any_toaster);
  RunContext ctx = Context(FixedClient("a toaster"));
  const MetricReport r = RunAxis(c, ctx);
  const ReportCell& cell = r.cells.at({"hallucination", "zero_shot", 0});
  EXPECT_EQ(cell.metrics.at("chair_s").mean, 100.0);
  EXPECT_EQ(cell.metrics.at("chair_i").mean, 100.0);
}

TEST(HallucinationRunTest, FailingEndpointInvalidatesCells) {
  ExperimentConfig c = LoadConfig(DataPath("configs/hallucination.json"));
  c.variants = {Variant::kIcl};
  c.shots = {2};
  RunContext ctx = Context(std::make_shared<Client>(
      std::make_shared<ScriptedTransport>(
          MockScript::Parse(R"({"rules": [{"type": "fail", "status": 500, "times": 1000000}]})")),
      ClientOptions{2, 0, std::chrono::milliseconds(0)}));
  const MetricReport r = RunAxis(c, ctx);
  const ReportCell& cell = r.cells.at({"hallucination", "icl", 2});
  EXPECT_FALSE(cell.valid);
  EXPECT_EQ(cell.diagnostics.at("failed_exchanges"), 75);
  EXPECT_FALSE(cell.errors.empty());
}

// ---------------------------------------------------------------------------
// Instruction following.

TEST(InstructionRunTest, JudgeScoreUsesHundredPointScale) {
  ExperimentConfig c = LoadConfig(DataPath("configs/instruction.json"));
  RunContext ctx = Context(FixedClient("Some response."), std::make_shared<Judge>(FixedClient("5")));
  const MetricReport r = RunInstructionAxis(c, ctx);
  for (const CellKey& k : std::vector<CellKey>{
           {"instruction", "zero_shot", 0}, {"instruction", "icl", 0}, {"instruction", "icl", 2}}) {
    ASSERT_TRUE(r.cells.count(k)) << k.variant << k.shots;
    EXPECT_EQ(r.cells.at(k).metrics.at("judge_score").mean, 50.0);
    EXPECT_FALSE(r.cells.at(k).metrics.count("relative_score"));
    EXPECT_TRUE(r.cells.at(k).valid);
  }
  EXPECT_EQ(r.metadata.judge_endpoint_id, "scripted");
}

TEST(InstructionRunTest, PairedJudgeRepliesGiveRelativeScore) {
  ExperimentConfig c = LoadConfig(DataPath("configs/instruction.json"));
  c.shots = {2};
  RunContext ctx = Context(FixedClient("Some response."), std::make_shared<Judge>(FixedClient("8 6")));
  const MetricReport r = RunInstructionAxis(c, ctx);
  const ReportCell& cell = r.cells.at({"instruction", "icl", 2});
  EXPECT_EQ(cell.metrics.at("judge_score").mean, 60.0);
  EXPECT_DOUBLE_EQ(cell.metrics.at("relative_score").mean, 75.0);
}

TEST(InstructionRunTest, WithoutJudgeTheAxisIsSkipped) {
  RunContext ctx = Context(FixedClient("Some response."));
  const MetricReport r = RunInstructionAxis(LoadConfig(DataPath("configs/instruction.json")), ctx);
  EXPECT_TRUE(r.cells.empty());
  bool skipped = false;
  for (const auto& n : r.notices) skipped = skipped || n.find("skipped") != std::string::npos;
  EXPECT_TRUE(skipped);
}

TEST(InstructionRunTest, DemonstrationsShareTheQueryType) {
  ExperimentConfig c = LoadConfig(DataPath("configs/instruction.json"));
  c.shots = {2};
  c.variants = {Variant::kIcl};
  auto recorder = std::make_shared<RecordingTransport>(
      std::make_shared<ScriptedTransport>(MockScript::Parse(R"({"default": "ok"})")));
  RunContext ctx = Context(std::make_shared<Client>(recorder), std::make_shared<Judge>(FixedClient("5")));
  RunInstructionAxis(c, ctx);

  std::map<std::string, std::string> type_of;
  for (const auto& rec : LoadInstructions(c.dataset_path)) {
    type_of[rec.instruction] = BalanceLabel(rec);
  }
  const std::regex cue("Instruction: (.*) Response:");
  std::size_t checked = 0;
  for (const std::string& body : recorder->bodies()) {
    const WireRequest req = DecodeRequest(body);
    if (req.prompt.ImageCount() != 3) continue;
    std::vector<std::string> types;
    for (const Segment& s : req.prompt.segments) {
      std::smatch m;
      if (s.is_image() || !std::regex_search(s.text(), m, cue)) continue;
      ASSERT_TRUE(type_of.count(m[1].str())) << m[1].str();
      types.push_back(type_of[m[1].str()]);
    }
    ASSERT_EQ(types.size(), 3u);
    EXPECT_EQ(types[0], types[2]);
    EXPECT_EQ(types[1], types[2]);
    ++checked;
  }
  EXPECT_EQ(checked, 18u * 3u);
}

// ---------------------------------------------------------------------------
// Explainability.

TEST(ExplainabilityRunTest, GeneratedNegativesFeedChainOfHindsight) {
  ExperimentConfig c = LoadConfig(DataPath("configs/explainability.json"));
  c.variants = {Variant::kIcl};
  c.shots = {2};
  c.n_queries = 20;
  const std::string negatives = TempPath("negatives.jsonl");
  RunContext gen_ctx = Context(FixedClient("because it is"));
  GenerateNegatives(c, gen_ctx, negatives);
  const auto records = LoadExplanations(c.dataset_path);
  const std::string text = ReadTextFile(negatives);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), records.size());

  c.negative_source = NegativeSource::kGenerationsFile;
  c.negatives_path = negatives;
  c.variants = {Variant::kCohIcl};
  auto recorder = std::make_shared<RecordingTransport>(std::make_shared<ScriptedTransport>(
      MockScript::Parse(R"({"default": "people are holding umbrellas"})")));
  RunContext ctx = Context(std::make_shared<Client>(recorder));
  const MetricReport r = RunChainOfHindsight(c, ctx);
  const ReportCell& cell = r.cells.at({"explainability", "coh_icl", 2});
  EXPECT_TRUE(cell.valid);
  EXPECT_EQ(cell.diagnostics.at("coh_pool_without_negative"), 0);
  EXPECT_GT(cell.metrics.at("cider").mean, 0.0);
  for (const std::string& body : recorder->bodies()) {
    EXPECT_NE(body.find("a bad explanation is: because it is"), std::string::npos);
  }
}

TEST(ExplainabilityRunTest, NegativesFileMustMatchDataset) {
  ExperimentConfig c = LoadConfig(DataPath("configs/explainability.json"));
  c.variants = {Variant::kCohIcl};
  c.negative_source = NegativeSource::kGenerationsFile;
  c.negatives_path = TempPath("bad_negatives.jsonl");
  WriteTextFile(c.negatives_path,
                R"({"record_index": 0, "image_id": "nope", "output": "x"})" "\n");
  RunContext ctx = Context(FixedClient("x"));
  try {
    RunChainOfHindsight(c, ctx);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConsistency);
    EXPECT_NE(std::string(e.what()).find(":1:"), std::string::npos);
  }
}

TEST(ExplainabilityRunTest, NegativesOnlyForExplainability) {
  RunContext ctx = Context(FixedClient("x"));
  try {
    GenerateNegatives(LoadConfig(DataPath("configs/abstention.json")), ctx, TempPath("n.jsonl"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

// ---------------------------------------------------------------------------
// Run log.

TEST(RunLogTest, RecordsRoundTrip) {
  RunRecord r;
  r.cell = {"abstention", "sc_icl", 8};
  r.seed = 17;
  r.record_index = 42;
  r.image_id = "100042";
  r.prompt_digests = {"aa", "bb"};
  r.outputs = {"red\nmore", "no"};
  r.parsed = "doesnotapply";
  r.flags = {"corrected"};
  const RunRecord back = RunRecordFromJson(ToJsonLine(r));
  EXPECT_EQ(back.cell, r.cell);
  EXPECT_EQ(back.seed, r.seed);
  EXPECT_EQ(back.record_index, r.record_index);
  EXPECT_EQ(back.image_id, r.image_id);
  EXPECT_EQ(back.prompt_digests, r.prompt_digests);
  EXPECT_EQ(back.outputs, r.outputs);
  EXPECT_EQ(back.parsed, r.parsed);
  EXPECT_EQ(back.flags, r.flags);
  EXPECT_EQ(ToJsonLine(r).find('\n'), std::string::npos);
}

TEST(RunLogTest, RunWritesOneLinePerQueryAndTheReport) {
  ExperimentConfig c = LoadConfig(DataPath("configs/compositionality.json"));
  c.variants = {Variant::kIcl};
  c.shots = {2};
  RunLog log;
  RunContext ctx = Context(FixedClient("yes"), nullptr, &log);
  const MetricReport r = RunAxis(c, ctx);
  EXPECT_EQ(log.Records().size(), 24u * 3u);
  const std::string path = TempPath("run.jsonl");
  log.WriteTo(path);
  EXPECT_EQ(ReadReport(path), r);
}

}  // namespace
}  // namespace evalign
