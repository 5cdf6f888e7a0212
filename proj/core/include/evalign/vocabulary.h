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

#ifndef EVALIGN_VOCABULARY_H_
#define EVALIGN_VOCABULARY_H_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace evalign {

// Rule-based English singularization. `exceptions` maps irregular plurals to
// their singular ("people" -> "person") and is consulted first.
std::string Singularize(std::string_view word,
                        const std::map<std::string, std::string>& exceptions);

// Canonical object labels plus surface synonyms (multiword allowed). Surface
// forms are stored singularized token-by-token so that matching against
// singularized caption tokens is exact.
class ObjectVocabulary {
 public:
  ObjectVocabulary() = default;

  // `synonyms_tsv`: one canonical label per line, optionally followed by
  // tab-separated synonyms. Blank lines and lines starting with '#' are
  // skipped. `exceptions_tsv`: "plural<TAB>singular" per line.
  static ObjectVocabulary Parse(std::string_view synonyms_tsv,
                                std::string_view exceptions_tsv = {});
  static ObjectVocabulary Load(const std::string& synonyms_path,
                               const std::string& exceptions_path = {});
  // The bundled 80-class COCO vocabulary and its exception list.
  static const ObjectVocabulary& Coco80();

  const std::set<std::string>& canonical() const { return canonical_; }
  const std::map<std::string, std::string>& synonyms() const {
    return synonyms_;
  }
  const std::map<std::string, std::string>& exceptions() const {
    return exceptions_;
  }

  bool Contains(std::string_view label) const {
    return canonical_.count(std::string(label)) > 0;
  }

  // Maps a surface phrase to its canonical label.
  std::optional<std::string> Canonicalize(std::string_view phrase) const;

  // Lowercase, split on non-letters, singularize, then match synonyms
  // greedily longest-first. Returns the canonical labels mentioned.
  std::set<std::string> ExtractObjects(std::string_view caption) const;

  void AddSynonym(std::string_view surface, std::string_view canonical);

 private:
  std::string NormalizePhrase(std::string_view phrase) const;

  std::set<std::string> canonical_;
  // Singularized, space-joined surface form -> canonical label.
  std::map<std::string, std::string> synonyms_;
  std::map<std::string, std::string> exceptions_;
  std::size_t max_phrase_tokens_ = 1;
};

}  // namespace evalign

#endif  // EVALIGN_VOCABULARY_H_
