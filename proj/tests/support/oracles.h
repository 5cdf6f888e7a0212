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

// Reference implementations used only by tests. They share no code with the
// library: tokenization, counting and arithmetic are redone from scratch in
// the most direct (and slowest) form.

#ifndef EVALIGN_TESTS_SUPPORT_ORACLES_H_
#define EVALIGN_TESTS_SUPPORT_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace evalign::oracle {

// Lowercase, apostrophes deleted, other ASCII punctuation as spaces.
inline std::vector<std::string> Tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (c == '\'') continue;
    const bool punct = (c >= 33 && c <= 47) || (c >= 58 && c <= 64) ||
                       (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                       c == '\v' || c == '\f';
    if (punct || space) {
      flush();
    } else if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c + 32));
    } else {
      cur.push_back(static_cast<char>(c));
    }
  }
  flush();
  return out;
}

// All n-grams of exactly length n, as token lists (duplicates kept).
inline std::vector<std::vector<std::string>> Grams(
    const std::vector<std::string>& toks, int n) {
  std::vector<std::vector<std::string>> out;
  for (int i = 0; i + n <= static_cast<int>(toks.size()); ++i) {
    out.emplace_back(toks.begin() + i, toks.begin() + i + n);
  }
  return out;
}

inline int CountIn(const std::vector<std::vector<std::string>>& grams,
                   const std::vector<std::string>& g) {
  return static_cast<int>(std::count(grams.begin(), grams.end(), g));
}

// CIDEr-D by enumeration: a dense vocabulary of every n-gram in the corpus,
// document frequency by scanning each reference set, clipped dot product,
// Gaussian length penalty, x10. Per-item scores are returned.
inline std::vector<double> CiderD(
    const std::vector<std::string>& candidates,
    const std::vector<std::vector<std::string>>& references, int n_max = 4,
    double sigma = 6.0) {
  const double num_docs = static_cast<double>(references.size());
  std::vector<double> scores;
  for (std::size_t item = 0; item < candidates.size(); ++item) {
    const auto cand = Tokens(candidates[item]);
    double item_sum = 0.0;
    for (const auto& ref_text : references[item]) {
      const auto ref = Tokens(ref_text);
      double n_sum = 0.0;
      for (int n = 1; n <= n_max; ++n) {
        const auto cg = Grams(cand, n);
        const auto rg = Grams(ref, n);
        std::vector<std::vector<std::string>> vocab;
        for (const auto& g : cg) {
          if (std::find(vocab.begin(), vocab.end(), g) == vocab.end()) vocab.push_back(g);
        }
        for (const auto& g : rg) {
          if (std::find(vocab.begin(), vocab.end(), g) == vocab.end()) vocab.push_back(g);
        }
        std::vector<double> vc, vr;
        for (const auto& g : vocab) {
          int df = 0;
          for (const auto& set : references) {
            bool present = false;
            for (const auto& r : set) present = present || CountIn(Grams(Tokens(r), n), g) > 0;
            df += present;
          }
          const double idf = std::log(num_docs) - std::log(std::max(1.0, double(df)));
          vc.push_back(CountIn(cg, g) * idf);
          vr.push_back(CountIn(rg, g) * idf);
        }
        double dot = 0.0, nc = 0.0, nr = 0.0;
        for (std::size_t k = 0; k < vocab.size(); ++k) {
          dot += std::min(vc[k], vr[k]) * vr[k];
          nc += vc[k] * vc[k];
          nr += vr[k] * vr[k];
        }
        if (nc > 0.0 && nr > 0.0) {
          const double d = double(cand.size()) - double(ref.size());
          n_sum += dot / (std::sqrt(nc) * std::sqrt(nr)) *
                   std::exp(-d * d / (2.0 * sigma * sigma));
        }
      }
      item_sum += n_sum / n_max;
    }
    scores.push_back(10.0 * item_sum / double(references[item].size()));
  }
  return scores;
}

struct Confusion {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  bool degenerate = false;
};

// Binary task "predicted abstain" vs "labelled absurd" from a 2x2 table.
inline Confusion AbstainConfusion(const std::vector<bool>& predicted,
                                  const std::vector<bool>& actual) {
  long table[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    ++table[predicted[i] ? 1 : 0][actual[i] ? 1 : 0];
  }
  const long tp = table[1][1], fp = table[1][0], fn = table[0][1], tn = table[0][0];
  Confusion c;
  c.degenerate = tp + fp == 0 || tp + fn == 0;
  if (tp + fp > 0) c.precision = double(tp) / double(tp + fp);
  if (tp + fn > 0) c.recall = double(tp) / double(tp + fn);
  if (!c.degenerate && tp > 0) c.f1 = 2.0 * c.precision * c.recall / (c.precision + c.recall);
  if (!predicted.empty()) c.accuracy = double(tp + tn) / double(predicted.size());
  return c;
}

// Two-pass mean and sample standard deviation.
inline std::pair<double, double> MeanStd(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / double(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / double(xs.size() - 1))};
}

// Small deterministic generator for property tests (xorshift64*).
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t Next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dULL;
  }
  // Uniform-ish in [0, n).
  std::size_t Below(std::size_t n) { return static_cast<std::size_t>(Next() % n); }
  bool Coin(double p = 0.5) { return double(Next() >> 11) / double(1ULL << 53) < p; }
  double Uniform(double lo, double hi) {
    return lo + (hi - lo) * (double(Next() >> 11) / double(1ULL << 53));
  }
  template <typename T>
  const T& Pick(const std::vector<T>& v) { return v[Below(v.size())]; }
  std::string Word(std::size_t max_len = 6) {
    std::string w;
    const std::size_t len = 1 + Below(max_len);
    for (std::size_t i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + Below(26)));
    return w;
  }

 private:
  std::uint64_t state_;
};

}  // namespace evalign::oracle

#endif  // EVALIGN_TESTS_SUPPORT_ORACLES_H_
