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

#ifndef EVALIGN_CORPUS_H_
#define EVALIGN_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evalign/vocabulary.h"

namespace evalign {

inline constexpr std::string_view kDefaultAbstentionKeyword = "doesnotapply";

// Images travel to the endpoint by reference; equality is by id.
struct ImageRef {
  std::string id;
  std::string uri;

  friend bool operator==(const ImageRef& a, const ImageRef& b) {
    return a.id == b.id;
  }
};

struct CaptionRecord {
  ImageRef image;
  std::vector<std::string> references;
  std::set<std::string> gt_objects;

  friend bool operator==(const CaptionRecord&, const CaptionRecord&) = default;
};

struct VqaRecord {
  ImageRef image;
  std::string question;
  std::string answer;
  bool absurd = false;
  std::optional<std::string> qtype;

  friend bool operator==(const VqaRecord&, const VqaRecord&) = default;
};

enum class ItmLabel { kPositive, kNegative };

enum class NegativeKind {
  kHnAtom,
  kHnComp,
  kHnAtomComp,
  kReplaceObject,
  kReplaceAttribute,
  kReplaceRelation,
  kSwapObject,
  kSwapAttribute,
  kAddObject,
  kAddAttribute,
};

std::string_view ItmLabelName(ItmLabel label);
std::string_view NegativeKindName(NegativeKind kind);
std::optional<NegativeKind> ParseNegativeKind(std::string_view name);

struct ItmRecord {
  ImageRef image;
  std::string caption;
  ItmLabel label = ItmLabel::kPositive;
  std::optional<NegativeKind> negative_kind;

  friend bool operator==(const ItmRecord&, const ItmRecord&) = default;
};

struct ExplainRecord {
  ImageRef image;
  std::string question;
  std::string answer;
  std::vector<std::string> explanations;
  // Optional bad explanation for chain-of-hindsight contexts.
  std::optional<std::string> negative_explanation;

  friend bool operator==(const ExplainRecord&, const ExplainRecord&) = default;
};

enum class InstructionType { kDetailedDescription, kComplexQuestion, kConversation };

std::string_view InstructionTypeName(InstructionType type);
std::optional<InstructionType> ParseInstructionType(std::string_view name);

struct InstructionRecord {
  ImageRef image;
  std::string instruction;
  std::string gt_response;
  InstructionType itype = InstructionType::kDetailedDescription;

  friend bool operator==(const InstructionRecord&,
                         const InstructionRecord&) = default;
};

// ---------------------------------------------------------------------------
// Loaders. Every dataset except raw COCO is one JSON object per line; parse
// errors name the file and line.

// Native COCO: `captions_json` carries "images" and caption "annotations";
// `instances_json` carries "categories" and instance "annotations". The two
// may be the same document. Every instance category must canonicalize into
// `vocab`.
std::vector<CaptionRecord> ParseCocoCaptions(std::string_view captions_json,
                                             std::string_view instances_json,
                                             const ObjectVocabulary& vocab);
std::vector<CaptionRecord> LoadCocoCaptions(const std::string& captions_path,
                                            const std::string& instances_path,
                                            const ObjectVocabulary& vocab);

std::vector<CaptionRecord> LoadCaptions(const std::string& path,
                                        const ObjectVocabulary& vocab);
std::vector<VqaRecord> LoadVqa(
    const std::string& path,
    std::string_view abstention_keyword = kDefaultAbstentionKeyword);
std::vector<ItmRecord> LoadItm(const std::string& path);
std::vector<ExplainRecord> LoadExplanations(const std::string& path);
std::vector<InstructionRecord> LoadInstructions(const std::string& path);

// Same as the Load* functions but over in-memory line-delimited text.
// `source` is used in error messages.
std::vector<CaptionRecord> ParseCaptions(std::string_view jsonl,
                                         const ObjectVocabulary& vocab,
                                         std::string_view source = "<memory>");
std::vector<VqaRecord> ParseVqa(
    std::string_view jsonl,
    std::string_view abstention_keyword = kDefaultAbstentionKeyword,
    std::string_view source = "<memory>");
std::vector<ItmRecord> ParseItm(std::string_view jsonl,
                                std::string_view source = "<memory>");
std::vector<ExplainRecord> ParseExplanations(
    std::string_view jsonl, std::string_view source = "<memory>");
std::vector<InstructionRecord> ParseInstructions(
    std::string_view jsonl, std::string_view source = "<memory>");

// Serializers producing the line formats above (one record per line).
std::string ToJsonl(std::span<const CaptionRecord> records);
std::string ToJsonl(std::span<const VqaRecord> records);
std::string ToJsonl(std::span<const ItmRecord> records);
std::string ToJsonl(std::span<const ExplainRecord> records);
std::string ToJsonl(std::span<const InstructionRecord> records);

void WriteTextFile(const std::string& path, std::string_view contents);
std::string ReadTextFile(const std::string& path);

// ---------------------------------------------------------------------------
// Sampling.

// Record identity for split disjointness: (dataset id, record index).
struct RecordId {
  std::string dataset;
  std::size_t index = 0;

  friend auto operator<=>(const RecordId&, const RecordId&) = default;
};

struct BalancePolicy {
  enum class Kind { kNatural, kByLabel };
  Kind kind = Kind::kNatural;
  // Target fraction per label; must sum to 1 for kByLabel.
  std::map<std::string, double> targets;
  // Demo-pool size for kByLabel; the largest feasible size when unset.
  std::optional<std::size_t> pool_size;

  static BalancePolicy Natural() { return {}; }
  static BalancePolicy Even(const std::vector<std::string>& labels);
};

struct SampledSplit {
  std::string dataset;
  std::uint64_t seed = 0;
  std::vector<RecordId> queries;
  std::vector<RecordId> demo_pool;

  friend bool operator==(const SampledSplit&, const SampledSplit&) = default;
};

// Deterministic across platforms: uses mt19937_64 output directly rather
// than the implementation-defined standard distributions.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : engine_(seed) {}
  // Independent stream derived from (seed, stream, ordinal).
  static SplitRng Derive(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t ordinal);

  // Uniform in [0, bound). bound > 0.
  std::size_t Below(std::size_t bound);

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[Below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Splits `labels.size()` records into queries and a demonstration pool.
// kNatural: uniform shuffle, first `n_queries` are queries. kByLabel: queries
// are stratified by label; the pool is then drawn to the policy's targets.
SampledSplit SampleSplit(std::string_view dataset,
                         std::span<const std::string> labels,
                         std::size_t n_queries, std::uint64_t seed,
                         const BalancePolicy& policy = {});

std::string BalanceLabel(const CaptionRecord& record);
std::string BalanceLabel(const VqaRecord& record);
std::string BalanceLabel(const ItmRecord& record);
std::string BalanceLabel(const ExplainRecord& record);
std::string BalanceLabel(const InstructionRecord& record);

template <typename Record>
std::vector<std::string> BalanceLabels(std::span<const Record> records) {
  std::vector<std::string> labels;
  labels.reserve(records.size());
  for (const auto& r : records) labels.push_back(BalanceLabel(r));
  return labels;
}

template <typename Record>
SampledSplit SampleSplit(std::string_view dataset,
                         std::span<const Record> records, std::size_t n_queries,
                         std::uint64_t seed, const BalancePolicy& policy = {}) {
  const auto labels = BalanceLabels(records);
  return SampleSplit(dataset, std::span<const std::string>(labels), n_queries,
                     seed, policy);
}

// Draws `n` distinct indices from `candidates` (record indices). With a
// kByLabel policy the per-label counts follow the targets; `labels` is indexed
// by record index. Throws kBalance when a label cannot be filled.
std::vector<std::size_t> DrawDemonstrations(std::span<const std::size_t> candidates,
                                            std::span<const std::string> labels,
                                            std::size_t n,
                                            const BalancePolicy& policy,
                                            SplitRng& rng);

// Largest-remainder apportionment of `total` over `weights` (sum > 0).
std::vector<std::size_t> Apportion(std::size_t total,
                                   const std::vector<double>& weights);

}  // namespace evalign

#endif  // EVALIGN_CORPUS_H_
