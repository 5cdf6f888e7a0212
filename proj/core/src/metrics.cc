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

#include "evalign/metrics.h"

#include <cmath>
#include <unordered_map>

#include "evalign/error.h"

namespace evalign {

// ---------------------------------------------------------------------------
// CHAIR.

ChairResult Chair(std::span<const ChairInput> captions,
                  const ObjectVocabulary& vocab, ChairGroundTruth mode) {
  if (captions.empty()) throw Error(ErrorKind::kArity, "CHAIR needs at least one caption");
  ChairResult result;
  std::size_t with_hallucination = 0;
  std::size_t mentioned_total = 0;
  std::size_t hallucinated_total = 0;
  for (const auto& item : captions) {
    std::set<std::string> truth = item.gt_objects;
    if (mode == ChairGroundTruth::kInstancesAndReferences) {
      for (const auto& ref : item.references) {
        auto objs = vocab.ExtractObjects(ref);
        truth.insert(objs.begin(), objs.end());
      }
    }
    CaptionObjects objects;
    objects.mentioned = vocab.ExtractObjects(item.caption);
    for (const auto& obj : objects.mentioned) {
      if (!truth.count(obj)) objects.hallucinated.insert(obj);
    }
    mentioned_total += objects.mentioned.size();
    hallucinated_total += objects.hallucinated.size();
    if (!objects.hallucinated.empty()) ++with_hallucination;
    result.per_caption.push_back(std::move(objects));
  }
  result.chair_s = static_cast<double>(with_hallucination) /
                   static_cast<double>(captions.size());
  result.chair_i = mentioned_total == 0
                       ? 0.0
                       : static_cast<double>(hallucinated_total) /
                             static_cast<double>(mentioned_total);
  return result;
}

// ---------------------------------------------------------------------------
// CIDEr-D.

namespace {

using NgramCounts = std::map<std::string, int>;

// counts[n-1] holds the n-grams of length n.
std::vector<NgramCounts> CountNgrams(const std::vector<std::string>& tokens,
                                     int n_max) {
  std::vector<NgramCounts> counts(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (int k = 1; k < n; ++k) {
        gram += ' ';
        gram += tokens[i + static_cast<std::size_t>(k)];
      }
      ++counts[static_cast<std::size_t>(n - 1)][gram];
    }
  }
  return counts;
}

struct WeightedVector {
  std::vector<std::unordered_map<std::string, double>> weights;
  std::vector<double> norms;
  std::size_t length = 0;
};

WeightedVector Weigh(const std::vector<std::string>& tokens, int n_max,
                     const CiderIdf& idf) {
  WeightedVector v;
  v.length = tokens.size();
  const auto counts = CountNgrams(tokens, n_max);
  v.weights.resize(counts.size());
  v.norms.assign(counts.size(), 0.0);
  for (std::size_t n = 0; n < counts.size(); ++n) {
    double sq = 0.0;
    for (const auto& [gram, tf] : counts[n]) {
      const double w = tf * (idf.log_documents() - idf.LogFrequency(gram));
      v.weights[n][gram] = w;
      sq += w * w;
    }
    v.norms[n] = std::sqrt(sq);
  }
  return v;
}

double Similarity(const WeightedVector& hyp, const WeightedVector& ref,
                  double sigma) {
  const double delta = static_cast<double>(hyp.length) - static_cast<double>(ref.length);
  const double penalty = std::exp(-(delta * delta) / (2.0 * sigma * sigma));
  double total = 0.0;
  for (std::size_t n = 0; n < hyp.weights.size(); ++n) {
    double dot = 0.0;
    for (const auto& [gram, wh] : hyp.weights[n]) {
      auto it = ref.weights[n].find(gram);
      if (it == ref.weights[n].end()) continue;
      dot += std::min(wh, it->second) * it->second;
    }
    if (hyp.norms[n] != 0.0 && ref.norms[n] != 0.0) {
      total += dot / (hyp.norms[n] * ref.norms[n]) * penalty;
    }
  }
  return total / static_cast<double>(hyp.weights.size());
}

}  // namespace

CiderIdf::CiderIdf(std::span<const std::vector<std::string>> reference_sets,
                   int n_max) {
  for (const auto& refs : reference_sets) {
    std::set<std::string> seen;
    for (const auto& ref : refs) {
      for (const auto& grams : CountNgrams(CaptionTokens(ref), n_max)) {
        for (const auto& [gram, count] : grams) seen.insert(gram);
      }
    }
    for (const auto& gram : seen) ++document_frequency_[gram];
  }
  log_documents_ = std::log(static_cast<double>(reference_sets.size()));
}

double CiderIdf::LogFrequency(const std::string& ngram) const {
  auto it = document_frequency_.find(ngram);
  const int df = it == document_frequency_.end() ? 0 : it->second;
  return std::log(static_cast<double>(std::max(1, df)));
}

CiderResult Cider(std::span<const std::string> candidates,
                  std::span<const std::vector<std::string>> references,
                  const CiderSpec& spec,
                  std::span<const std::vector<std::string>> idf_corpus) {
  if (spec.n_max < 1) throw Error(ErrorKind::kInvalidArgument, "CIDEr n_max must be >= 1");
  if (candidates.size() != references.size()) {
    throw Error(ErrorKind::kArity, "CIDEr: " + std::to_string(candidates.size()) +
                                       " candidates but " +
                                       std::to_string(references.size()) + " reference sets");
  }
  for (const auto& refs : references) {
    if (refs.empty()) throw Error(ErrorKind::kArity, "CIDEr: empty reference set");
  }
  CiderResult result;
  if (candidates.empty()) return result;
  const bool external = spec.idf_source == CiderSpec::IdfSource::kReferenceSet;
  if (external && idf_corpus.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "CIDEr: reference-set IDF needs a corpus");
  }
  const CiderIdf idf(external ? idf_corpus : references, spec.n_max);

  double sum = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const WeightedVector hyp = Weigh(CaptionTokens(candidates[i]), spec.n_max, idf);
    double item = 0.0;
    for (const auto& ref : references[i]) {
      item += Similarity(hyp, Weigh(CaptionTokens(ref), spec.n_max, idf), spec.sigma);
    }
    item = item / static_cast<double>(references[i].size()) * 10.0;
    result.per_item.push_back(item);
    sum += item;
  }
  result.score = sum / static_cast<double>(candidates.size());
  return result;
}

// ---------------------------------------------------------------------------
// Abstention.

double ExactMatchAccuracy(std::span<const std::string> preds,
                          std::span<const std::string> answers) {
  if (preds.size() != answers.size()) {
    throw Error(ErrorKind::kArity, "prediction and answer counts differ");
  }
  if (preds.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    hits += NormalizeAnswer(preds[i]) == NormalizeAnswer(answers[i]);
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

AbstentionResult AbstentionMetrics(std::span<const std::string> preds,
                                   std::span<const VqaRecord> records,
                                   std::string_view keyword) {
  if (preds.size() != records.size()) {
    throw Error(ErrorKind::kArity, "prediction and record counts differ");
  }
  AbstentionResult r;
  const std::string key = NormalizeAnswer(keyword);
  std::size_t correct = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_type;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::string pred = NormalizeAnswer(preds[i]);
    const bool hit = pred == NormalizeAnswer(records[i].answer);
    correct += hit;
    const bool abstain = pred == key;
    const bool absurd = records[i].absurd;
    if (abstain && absurd) ++r.true_positive;
    if (abstain && !absurd) ++r.false_positive;
    if (!abstain && absurd) ++r.false_negative;
    if (!abstain && !absurd) ++r.true_negative;
    if (records[i].qtype) {
      auto& [hits, total] = per_type[*records[i].qtype];
      hits += hit;
      ++total;
    }
  }
  if (preds.empty()) return r;
  const double n = static_cast<double>(preds.size());
  r.overall_acc = static_cast<double>(correct) / n;
  r.abst_acc = static_cast<double>(r.true_positive + r.true_negative) / n;
  const std::size_t predicted = r.true_positive + r.false_positive;
  const std::size_t actual = r.true_positive + r.false_negative;
  if (predicted > 0) r.abst_precision = static_cast<double>(r.true_positive) / predicted;
  if (actual > 0) r.abst_recall = static_cast<double>(r.true_positive) / actual;
  r.degenerate = predicted == 0 || actual == 0;
  if (!r.degenerate && r.abst_precision + r.abst_recall > 0.0) {
    r.abst_f1 = 2.0 * r.abst_precision * r.abst_recall /
                (r.abst_precision + r.abst_recall);
  }
  for (const auto& [type, counts] : per_type) {
    r.per_type_acc[type] = static_cast<double>(counts.first) / counts.second;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Compositionality.

namespace {

bool Matches(YesNo verdict, ItmLabel label) {
  return (verdict == YesNo::kYes && label == ItmLabel::kPositive) ||
         (verdict == YesNo::kNo && label == ItmLabel::kNegative);
}

}  // namespace

double ItmAccuracy(std::span<const YesNo> verdicts,
                   std::span<const ItmLabel> labels) {
  if (verdicts.size() != labels.size()) {
    throw Error(ErrorKind::kArity, "verdict and label counts differ");
  }
  if (verdicts.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) hits += Matches(verdicts[i], labels[i]);
  return static_cast<double>(hits) / static_cast<double>(verdicts.size());
}

ItmResult ItmAccuracy(std::span<const YesNo> verdicts,
                      std::span<const ItmRecord> records) {
  if (verdicts.size() != records.size()) {
    throw Error(ErrorKind::kArity, "verdict and record counts differ");
  }
  ItmResult result;
  std::map<std::string, std::size_t> hits;
  std::size_t total_hits = 0;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    const auto& rec = records[i];
    const std::string kind =
        rec.label == ItmLabel::kPositive
            ? "positive"
            : (rec.negative_kind ? std::string(NegativeKindName(*rec.negative_kind))
                                 : "negative");
    const bool hit = Matches(verdicts[i], rec.label);
    total_hits += hit;
    hits[kind] += hit;
    ++result.per_kind_count[kind];
  }
  if (!verdicts.empty()) {
    result.accuracy = static_cast<double>(total_hits) / static_cast<double>(verdicts.size());
  }
  for (const auto& [kind, count] : result.per_kind_count) {
    result.per_kind[kind] = static_cast<double>(hits[kind]) / static_cast<double>(count);
  }
  return result;
}

double ItsAccuracy(std::span<const std::optional<std::size_t>> choices,
                   std::span<const std::size_t> correct) {
  if (choices.size() != correct.size()) {
    throw Error(ErrorKind::kArity, "choice and answer counts differ");
  }
  if (choices.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < choices.size(); ++i) {
    hits += choices[i].has_value() && *choices[i] == correct[i];
  }
  return static_cast<double>(hits) / static_cast<double>(choices.size());
}

// ---------------------------------------------------------------------------
// Aggregation.

Aggregate AggregateScores(std::span<const double> per_seed) {
  if (per_seed.empty()) throw Error(ErrorKind::kArity, "nothing to aggregate");
  // Welford's update keeps the running variance numerically stable.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : per_seed) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  Aggregate out;
  out.mean = mean;
  out.n = n;
  out.single_sample = n == 1;
  out.std = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
  return out;
}

}  // namespace evalign
