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

#ifndef EVALIGN_METRICS_H_
#define EVALIGN_METRICS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evalign/corpus.h"
#include "evalign/promptkit.h"
#include "evalign/text.h"
#include "evalign/vocabulary.h"

namespace evalign {

// ---------------------------------------------------------------------------
// CHAIR object hallucination.

enum class ChairGroundTruth {
  // Objects from the instance annotations only.
  kInstances,
  // Instances plus objects mentioned in the reference captions.
  kInstancesAndReferences,
};

struct ChairInput {
  std::string caption;
  std::set<std::string> gt_objects;
  std::vector<std::string> references;
};

struct CaptionObjects {
  std::set<std::string> mentioned;
  std::set<std::string> hallucinated;
};

struct ChairResult {
  // Fractions in [0, 1].
  double chair_s = 0.0;
  double chair_i = 0.0;
  std::vector<CaptionObjects> per_caption;
};

// chair_s = captions with >= 1 hallucinated object / captions;
// chair_i = sum |hallucinated| / sum |mentioned|, 0 when nothing is mentioned.
// Throws kArity on empty input.
ChairResult Chair(std::span<const ChairInput> captions,
                  const ObjectVocabulary& vocab,
                  ChairGroundTruth mode = ChairGroundTruth::kInstances);

// ---------------------------------------------------------------------------
// CIDEr-D.

struct CiderSpec {
  enum class IdfSource {
    // Document frequencies from the evaluated reference sets.
    kCorpus,
    // Document frequencies from a separately supplied reference corpus.
    kReferenceSet,
  };

  int n_max = 4;
  double sigma = 6.0;
  IdfSource idf_source = IdfSource::kCorpus;
};

struct CiderResult {
  // Corpus mean of the per-item scores (x10 scale).
  double score = 0.0;
  std::vector<double> per_item;
};

// Document frequencies over reference sets: each set is one document.
class CiderIdf {
 public:
  CiderIdf(std::span<const std::vector<std::string>> reference_sets, int n_max);

  double log_documents() const { return log_documents_; }
  double LogFrequency(const std::string& ngram) const;

 private:
  std::map<std::string, int> document_frequency_;
  double log_documents_ = 0.0;
};

// `candidates[i]` is scored against `references[i]` (nonempty). With
// kReferenceSet, `idf_corpus` supplies the document frequencies. Throws
// kArity on length mismatch or an empty reference set, kInvalidArgument on
// n_max < 1.
CiderResult Cider(std::span<const std::string> candidates,
                  std::span<const std::vector<std::string>> references,
                  const CiderSpec& spec = {},
                  std::span<const std::vector<std::string>> idf_corpus = {});

// ---------------------------------------------------------------------------
// Abstention.

struct AbstentionResult {
  double overall_acc = 0.0;
  double abst_acc = 0.0;
  double abst_precision = 0.0;
  double abst_recall = 0.0;
  double abst_f1 = 0.0;
  // No abstain predictions or no absurd labels: F1 is reported as 0.
  bool degenerate = false;
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::size_t true_negative = 0;
  // Exact-match accuracy per question type (records with a qtype).
  std::map<std::string, double> per_type_acc;
};

// Predictions are normalized before comparison. Throws kArity on length
// mismatch.
AbstentionResult AbstentionMetrics(std::span<const std::string> preds,
                                   std::span<const VqaRecord> records,
                                   std::string_view keyword);

// Normalized exact match; empty inputs give 0.
double ExactMatchAccuracy(std::span<const std::string> preds,
                          std::span<const std::string> answers);

// ---------------------------------------------------------------------------
// Compositionality.

struct ItmResult {
  double accuracy = 0.0;
  // Keyed by "positive" and negative-kind names; accuracy within each group.
  std::map<std::string, double> per_kind;
  std::map<std::string, std::size_t> per_kind_count;
};

// yes <-> positive, no <-> negative, unknown is wrong.
ItmResult ItmAccuracy(std::span<const YesNo> verdicts,
                      std::span<const ItmRecord> records);
double ItmAccuracy(std::span<const YesNo> verdicts,
                   std::span<const ItmLabel> labels);

// Image-text selection: `choices[i]` is the picked caption index (nullopt for
// an unparseable reply), `correct[i]` the positive one.
double ItsAccuracy(std::span<const std::optional<std::size_t>> choices,
                   std::span<const std::size_t> correct);

// ---------------------------------------------------------------------------
// Aggregation over seeds.

struct Aggregate {
  double mean = 0.0;
  // Sample standard deviation (n - 1); 0 when n == 1.
  double std = 0.0;
  std::size_t n = 0;
  bool single_sample = false;
};

// Throws kArity on empty input.
Aggregate AggregateScores(std::span<const double> per_seed);

}  // namespace evalign

#endif  // EVALIGN_METRICS_H_
