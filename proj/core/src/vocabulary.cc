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

#include "evalign/vocabulary.h"

#include <algorithm>

#include "embedded_data.h"
#include "evalign/corpus.h"
#include "evalign/error.h"
#include "evalign/text.h"

namespace evalign {

namespace {

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

std::vector<std::string> SplitTabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.emplace_back(Trim(line.substr(start, tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

template <typename Fn>
void ForEachDataLine(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    if (!Trim(line).empty() && Trim(line).front() != '#') fn(line, line_no);
    if (end == text.size()) break;
    start = end + 1;
  }
}

}  // namespace

std::string Singularize(std::string_view word,
                        const std::map<std::string, std::string>& exceptions) {
  const std::string w(word);
  if (auto it = exceptions.find(w); it != exceptions.end()) return it->second;
  if (w.size() <= 3) return w;
  if (EndsWith(w, "ss") || EndsWith(w, "us") || EndsWith(w, "is")) return w;
  if (EndsWith(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (EndsWith(w, "sses") || EndsWith(w, "ches") || EndsWith(w, "shes") ||
      EndsWith(w, "xes") || EndsWith(w, "zes")) {
    return w.substr(0, w.size() - 2);
  }
  if (EndsWith(w, "s")) return w.substr(0, w.size() - 1);
  return w;
}

ObjectVocabulary ObjectVocabulary::Parse(std::string_view synonyms_tsv,
                                         std::string_view exceptions_tsv) {
  ObjectVocabulary vocab;
  ForEachDataLine(exceptions_tsv, [&](std::string_view line, std::size_t n) {
    const auto fields = SplitTabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorKind::kParse, "exception list line " + std::to_string(n) +
                                         ": expected plural<TAB>singular");
    }
    vocab.exceptions_[ToLower(fields[0])] = ToLower(fields[1]);
  });
  ForEachDataLine(synonyms_tsv, [&](std::string_view line, std::size_t n) {
    const auto fields = SplitTabs(line);
    const std::string canonical = ToLower(fields[0]);
    if (canonical.empty()) {
      throw Error(ErrorKind::kParse,
                  "synonym table line " + std::to_string(n) + ": empty label");
    }
    vocab.canonical_.insert(canonical);
    for (const auto& surface : fields) {
      if (!surface.empty()) vocab.AddSynonym(surface, canonical);
    }
  });
  return vocab;
}

ObjectVocabulary ObjectVocabulary::Load(const std::string& synonyms_path,
                                        const std::string& exceptions_path) {
  const std::string synonyms = ReadTextFile(synonyms_path);
  const std::string exceptions =
      exceptions_path.empty() ? std::string() : ReadTextFile(exceptions_path);
  return Parse(synonyms, exceptions);
}

const ObjectVocabulary& ObjectVocabulary::Coco80() {
  static const ObjectVocabulary kVocab = Parse(
      embedded::coco80_synonyms_tsv(), embedded::singular_exceptions_tsv());
  return kVocab;
}

std::string ObjectVocabulary::NormalizePhrase(std::string_view phrase) const {
  std::vector<std::string> tokens = LetterTokens(phrase);
  for (auto& t : tokens) t = Singularize(t, exceptions_);
  return Join(tokens, " ");
}

void ObjectVocabulary::AddSynonym(std::string_view surface,
                                  std::string_view canonical) {
  const std::string label = ToLower(canonical);
  if (!canonical_.count(label)) {
    throw Error(ErrorKind::kVocabulary,
                "synonym target '" + label + "' is not a canonical label");
  }
  const std::string key = NormalizePhrase(surface);
  if (key.empty()) return;
  auto [it, inserted] = synonyms_.emplace(key, label);
  if (!inserted && it->second != label) {
    throw Error(ErrorKind::kVocabulary, "surface form '" + key +
                                            "' maps to both '" + it->second +
                                            "' and '" + label + "'");
  }
  const auto n_tokens =
      static_cast<std::size_t>(std::count(key.begin(), key.end(), ' ')) + 1;
  max_phrase_tokens_ = std::max(max_phrase_tokens_, n_tokens);
}

std::optional<std::string> ObjectVocabulary::Canonicalize(
    std::string_view phrase) const {
  auto it = synonyms_.find(NormalizePhrase(phrase));
  if (it == synonyms_.end()) return std::nullopt;
  return it->second;
}

std::set<std::string> ObjectVocabulary::ExtractObjects(
    std::string_view caption) const {
  std::vector<std::string> tokens = LetterTokens(caption);
  for (auto& t : tokens) t = Singularize(t, exceptions_);

  std::set<std::string> found;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const std::size_t longest = std::min(max_phrase_tokens_, tokens.size() - i);
    std::size_t matched = 0;
    for (std::size_t len = longest; len >= 1; --len) {
      std::string key = tokens[i];
      for (std::size_t k = 1; k < len; ++k) key += " " + tokens[i + k];
      if (auto it = synonyms_.find(key); it != synonyms_.end()) {
        found.insert(it->second);
        matched = len;
        break;
      }
    }
    i += matched > 0 ? matched : 1;
  }
  return found;
}

}  // namespace evalign
