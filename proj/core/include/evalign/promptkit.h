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

#ifndef EVALIGN_PROMPTKIT_H_
#define EVALIGN_PROMPTKIT_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evalign/corpus.h"

namespace evalign {

struct Segment {
  std::variant<ImageRef, std::string> payload;

  static Segment Image(ImageRef image) { return Segment{std::move(image)}; }
  static Segment Text(std::string text) { return Segment{std::move(text)}; }

  bool is_image() const { return std::holds_alternative<ImageRef>(payload); }
  const ImageRef& image() const { return std::get<ImageRef>(payload); }
  const std::string& text() const { return std::get<std::string>(payload); }

  friend bool operator==(const Segment& a, const Segment& b) {
    if (a.is_image() != b.is_image()) return false;
    // Compare full locators too; wire identity depends on them.
    if (a.is_image()) {
      return a.image().id == b.image().id && a.image().uri == b.image().uri;
    }
    return a.text() == b.text();
  }
};

struct InterleavedPrompt {
  std::vector<Segment> segments;

  std::size_t ImageCount() const;
  std::size_t TextCount() const;
  // Text of the final segment (the query cue); empty if it is an image.
  std::string_view QueryText() const;

  friend bool operator==(const InterleavedPrompt&,
                         const InterleavedPrompt&) = default;
};

struct PromptTemplate {
  std::string image_marker = "<image>";
  std::string chunk_end = "<|endofchunk|>";
  // Between consecutive fields inside one chunk (T and R, T and T+, ...).
  std::string field_separator = " ";
  // Appended to the task instruction before the first chunk.
  std::string instruction_separator = "\n";
  std::optional<std::string> task_instruction;

  // Throws kTemplate unless markers are nonempty and distinct.
  void Validate() const;
};

struct Demonstration {
  ImageRef image;
  std::string t;
  std::string r;
};

struct CohDemonstration {
  ImageRef image;
  std::string t;
  std::string t_pos;
  std::string r_pos;
  std::string t_neg;
  std::string r_neg;
};

struct MultitaskDemonstration {
  ImageRef image;
  std::string t1;
  std::string r1;
  std::string t2;
  std::string r2;
};

// Step-2 example for self-correction: the question and whether it is
// answerable from its image.
struct RelevanceExample {
  ImageRef image;
  std::string question;
  bool relevant = true;
};

inline constexpr std::string_view kQuestionPlaceholder = "{q}";

struct RelevanceProbe {
  std::string t2_template =
      "Is the following question relevant to the image: {q}? Answer:";
  std::string r2_yes = "yes";
  std::string r2_no = "no";
  std::string abstention_keyword = std::string(kDefaultAbstentionKeyword);

  // Throws kTemplate unless the template has exactly one placeholder.
  void Validate() const;
  // The template with the quoted question substituted.
  std::string Render(std::string_view question) const;
};

// Wire form: image segments become `image_marker`, text segments verbatim.
std::string Serialize(const InterleavedPrompt& prompt,
                      const PromptTemplate& tmpl);

// Validating parser for the chunk grammar
//   (instruction)? (IMG? TEXT CHUNK_END)* IMG TEXT
// where TEXT is nonempty and free of markers. Image locators travel beside
// the text (see ImagesOf); when `images` is given its length must equal the
// marker count and the refs are assigned in order, otherwise images come back
// as "#k" ordinals. Throws kParse on any deviation.
InterleavedPrompt ParseWire(std::string_view wire, const PromptTemplate& tmpl,
                            std::span<const ImageRef> images = {});
std::vector<ImageRef> ImagesOf(const InterleavedPrompt& prompt);
bool IsWellFormed(std::string_view wire, const PromptTemplate& tmpl);

// N chunks of <image> T R <|endofchunk|>, then <image> T. N may be zero.
InterleavedPrompt AssembleIcl(std::span<const Demonstration> demos,
                              const ImageRef& query_image,
                              std::string_view query_t,
                              const PromptTemplate& tmpl);

// Flamingo-style zero-shot: exactly two text-only chunks, then the query.
InterleavedPrompt AssembleZeroShot(std::span<const Demonstration> text_demos,
                                   const ImageRef& query_image,
                                   std::string_view query_t,
                                   const PromptTemplate& tmpl);

// Chunks carry T T+ R+ T- R-; the query ends with T+.
InterleavedPrompt AssembleCoh(std::span<const CohDemonstration> demos,
                              const ImageRef& query_image,
                              std::string_view query_t,
                              std::string_view query_t_pos,
                              const PromptTemplate& tmpl);

// Chunks carry T1 R1 T2 R2; the query ends after T1.
InterleavedPrompt AssembleMultitask(std::span<const MultitaskDemonstration> demos,
                                    const ImageRef& query_image,
                                    std::string_view query_t1,
                                    const PromptTemplate& tmpl);

// Relevance probe: chunks carry T2 "T_i" R2; the query embeds the original
// question the same way.
InterleavedPrompt AssembleSelfCorrection(std::span<const RelevanceExample> demos,
                                         const RelevanceProbe& probe,
                                         const ImageRef& query_image,
                                         std::string_view original_question,
                                         const PromptTemplate& tmpl);

enum class YesNo { kYes, kNo, kUnknown };

std::string_view YesNoName(YesNo v);

// First whitespace token, trailing punctuation dropped, compared
// case-insensitively against "yes" / "no".
YesNo ParseYesNo(std::string_view raw);

struct Correction {
  std::string answer;
  YesNo probe = YesNo::kUnknown;
  bool corrected = false;
  // The probe reply was neither yes nor no; treated as yes.
  bool probe_unparsed = false;
};

// Replaces the first answer with the abstention keyword iff the probe reply
// is "no". An answer that already abstains is left alone.
Correction CorrectAnswer(std::string_view o1, std::string_view o2,
                         const RelevanceProbe& probe);

enum class AnswerMode { kVerbatim, kVqa };

// Truncates at the earliest stop marker, trims, and lowercases in kVqa mode.
std::string ParseAnswer(std::string_view raw,
                        std::span<const std::string> stop_markers,
                        AnswerMode mode = AnswerMode::kVerbatim);

struct MultitaskOutput {
  std::string r1;
  std::string r2;
  bool cue_found = false;
};

// Splits a main+auxiliary continuation at the first occurrence of the T2
// cue. Without the cue the whole text is R1 and `cue_found` is false.
MultitaskOutput SplitMultitask(std::string_view continuation,
                               std::string_view t2_cue);

}  // namespace evalign

#endif  // EVALIGN_PROMPTKIT_H_
