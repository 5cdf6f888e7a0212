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

#include "evalign/promptkit.h"

#include <algorithm>
#include <cctype>

#include "evalign/error.h"
#include "evalign/text.h"

namespace evalign {

namespace {

void CheckClean(std::string_view field, const PromptTemplate& tmpl) {
  if (field.find(tmpl.image_marker) != std::string_view::npos ||
      field.find(tmpl.chunk_end) != std::string_view::npos) {
    throw Error(ErrorKind::kContamination,
                "text contains a reserved marker: '" + std::string(field) + "'");
  }
}

// Joins fields with the field separator after checking each for markers.
std::string JoinFields(std::initializer_list<std::string_view> fields,
                       const PromptTemplate& tmpl) {
  std::string out;
  bool first = true;
  for (std::string_view f : fields) {
    CheckClean(f, tmpl);
    if (!first) out += tmpl.field_separator;
    out += f;
    first = false;
  }
  return out;
}

// Starts a prompt with the optional task instruction.
InterleavedPrompt Begin(const PromptTemplate& tmpl) {
  tmpl.Validate();
  InterleavedPrompt prompt;
  if (tmpl.task_instruction) {
    CheckClean(*tmpl.task_instruction, tmpl);
    prompt.segments.push_back(
        Segment::Text(*tmpl.task_instruction + tmpl.instruction_separator));
  }
  return prompt;
}

void AddChunk(InterleavedPrompt& prompt, const ImageRef* image,
              std::string body, const PromptTemplate& tmpl) {
  if (image) prompt.segments.push_back(Segment::Image(*image));
  prompt.segments.push_back(Segment::Text(std::move(body) + tmpl.chunk_end));
}

void AddQuery(InterleavedPrompt& prompt, const ImageRef& image,
              std::string text) {
  if (text.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "query text is empty");
  }
  prompt.segments.push_back(Segment::Image(image));
  prompt.segments.push_back(Segment::Text(std::move(text)));
}

}  // namespace

std::size_t InterleavedPrompt::ImageCount() const {
  return static_cast<std::size_t>(std::count_if(
      segments.begin(), segments.end(), [](const Segment& s) { return s.is_image(); }));
}

std::size_t InterleavedPrompt::TextCount() const {
  return segments.size() - ImageCount();
}

std::string_view InterleavedPrompt::QueryText() const {
  if (segments.empty() || segments.back().is_image()) return {};
  return segments.back().text();
}

void PromptTemplate::Validate() const {
  if (image_marker.empty() || chunk_end.empty()) {
    throw Error(ErrorKind::kTemplate, "markers must be nonempty");
  }
  if (image_marker.find(chunk_end) != std::string::npos ||
      chunk_end.find(image_marker) != std::string::npos) {
    throw Error(ErrorKind::kTemplate, "markers must not overlap");
  }
}

void RelevanceProbe::Validate() const {
  if (CountOccurrences(t2_template, kQuestionPlaceholder) != 1) {
    throw Error(ErrorKind::kTemplate,
                "relevance probe needs exactly one {q} placeholder: '" +
                    t2_template + "'");
  }
}

std::string RelevanceProbe::Render(std::string_view question) const {
  Validate();
  std::string out = t2_template;
  const std::size_t at = out.find(kQuestionPlaceholder);
  out.replace(at, kQuestionPlaceholder.size(), "\"" + std::string(question) + "\"");
  return out;
}

std::string Serialize(const InterleavedPrompt& prompt,
                      const PromptTemplate& tmpl) {
  std::string out;
  for (const auto& seg : prompt.segments) {
    out += seg.is_image() ? tmpl.image_marker : seg.text();
  }
  return out;
}

std::vector<ImageRef> ImagesOf(const InterleavedPrompt& prompt) {
  std::vector<ImageRef> images;
  for (const auto& seg : prompt.segments) {
    if (seg.is_image()) images.push_back(seg.image());
  }
  return images;
}

InterleavedPrompt ParseWire(std::string_view wire, const PromptTemplate& tmpl,
                            std::span<const ImageRef> images) {
  tmpl.Validate();
  auto fail = [](const std::string& why) -> void {
    throw Error(ErrorKind::kParse, "malformed prompt: " + why);
  };

  InterleavedPrompt prompt;
  std::size_t pos = 0;
  if (tmpl.task_instruction) {
    const std::string prefix = *tmpl.task_instruction + tmpl.instruction_separator;
    if (wire.substr(0, prefix.size()) != prefix) fail("missing task instruction");
    prompt.segments.push_back(Segment::Text(prefix));
    pos = prefix.size();
  }

  // Tokenize into IMG, EOC and marker-free TEXT.
  enum class Tok { kImage, kEnd, kText };
  std::vector<std::pair<Tok, std::string_view>> toks;
  while (pos < wire.size()) {
    const std::string_view rest = wire.substr(pos);
    if (rest.substr(0, tmpl.image_marker.size()) == tmpl.image_marker) {
      toks.emplace_back(Tok::kImage, rest.substr(0, tmpl.image_marker.size()));
      pos += tmpl.image_marker.size();
      continue;
    }
    if (rest.substr(0, tmpl.chunk_end.size()) == tmpl.chunk_end) {
      toks.emplace_back(Tok::kEnd, rest.substr(0, tmpl.chunk_end.size()));
      pos += tmpl.chunk_end.size();
      continue;
    }
    const std::size_t next = std::min(rest.find(tmpl.image_marker),
                                      rest.find(tmpl.chunk_end));
    const std::size_t len = next == std::string_view::npos ? rest.size() : next;
    toks.emplace_back(Tok::kText, rest.substr(0, len));
    pos += len;
  }

  std::size_t image_count = 0;
  for (const auto& t : toks) image_count += t.first == Tok::kImage;
  if (!images.empty() && images.size() != image_count) {
    fail("expected " + std::to_string(images.size()) + " images, found " +
         std::to_string(image_count));
  }
  std::size_t next_image = 0;
  auto push_image = [&] {
    if (images.empty()) {
      const std::string ordinal = "#" + std::to_string(next_image);
      prompt.segments.push_back(Segment::Image({ordinal, ordinal}));
    } else {
      prompt.segments.push_back(Segment::Image(images[next_image]));
    }
    ++next_image;
  };

  // (IMG? TEXT EOC)* IMG TEXT
  std::size_t i = 0;
  while (true) {
    bool has_image = false;
    if (i < toks.size() && toks[i].first == Tok::kImage) {
      has_image = true;
      ++i;
    }
    if (i >= toks.size() || toks[i].first != Tok::kText) {
      fail("expected text at token " + std::to_string(i));
    }
    const std::string_view text = toks[i].second;
    ++i;
    if (i == toks.size()) {
      if (!has_image) fail("query has no image");
      push_image();
      prompt.segments.push_back(Segment::Text(std::string(text)));
      break;
    }
    if (toks[i].first != Tok::kEnd) fail("expected chunk end at token " + std::to_string(i));
    ++i;
    if (has_image) push_image();
    prompt.segments.push_back(Segment::Text(std::string(text) + tmpl.chunk_end));
    if (i == toks.size()) fail("prompt ends with a chunk end");
  }
  return prompt;
}

bool IsWellFormed(std::string_view wire, const PromptTemplate& tmpl) {
  try {
    ParseWire(wire, tmpl);
    return true;
  } catch (const Error&) {
    return false;
  }
}

InterleavedPrompt AssembleIcl(std::span<const Demonstration> demos,
                              const ImageRef& query_image,
                              std::string_view query_t,
                              const PromptTemplate& tmpl) {
  InterleavedPrompt prompt = Begin(tmpl);
  for (const auto& d : demos) {
    AddChunk(prompt, &d.image, JoinFields({d.t, d.r}, tmpl), tmpl);
  }
  CheckClean(query_t, tmpl);
  AddQuery(prompt, query_image, std::string(query_t));
  return prompt;
}

InterleavedPrompt AssembleZeroShot(std::span<const Demonstration> text_demos,
                                   const ImageRef& query_image,
                                   std::string_view query_t,
                                   const PromptTemplate& tmpl) {
  if (text_demos.size() != 2) {
    throw Error(ErrorKind::kArity, "zero-shot prompts take exactly 2 text demonstrations, got " +
                                       std::to_string(text_demos.size()));
  }
  InterleavedPrompt prompt = Begin(tmpl);
  for (const auto& d : text_demos) {
    AddChunk(prompt, nullptr, JoinFields({d.t, d.r}, tmpl), tmpl);
  }
  CheckClean(query_t, tmpl);
  AddQuery(prompt, query_image, std::string(query_t));
  return prompt;
}

InterleavedPrompt AssembleCoh(std::span<const CohDemonstration> demos,
                              const ImageRef& query_image,
                              std::string_view query_t,
                              std::string_view query_t_pos,
                              const PromptTemplate& tmpl) {
  if (demos.empty()) {
    throw Error(ErrorKind::kArity, "chain-of-hindsight prompts need at least one demonstration");
  }
  InterleavedPrompt prompt = Begin(tmpl);
  for (const auto& d : demos) {
    AddChunk(prompt, &d.image,
             JoinFields({d.t, d.t_pos, d.r_pos, d.t_neg, d.r_neg}, tmpl), tmpl);
  }
  AddQuery(prompt, query_image, JoinFields({query_t, query_t_pos}, tmpl));
  return prompt;
}

InterleavedPrompt AssembleMultitask(std::span<const MultitaskDemonstration> demos,
                                    const ImageRef& query_image,
                                    std::string_view query_t1,
                                    const PromptTemplate& tmpl) {
  if (demos.empty()) {
    throw Error(ErrorKind::kArity, "multitask prompts need at least one demonstration");
  }
  InterleavedPrompt prompt = Begin(tmpl);
  for (const auto& d : demos) {
    AddChunk(prompt, &d.image, JoinFields({d.t1, d.r1, d.t2, d.r2}, tmpl), tmpl);
  }
  CheckClean(query_t1, tmpl);
  AddQuery(prompt, query_image, std::string(query_t1));
  return prompt;
}

InterleavedPrompt AssembleSelfCorrection(std::span<const RelevanceExample> demos,
                                         const RelevanceProbe& probe,
                                         const ImageRef& query_image,
                                         std::string_view original_question,
                                         const PromptTemplate& tmpl) {
  probe.Validate();
  InterleavedPrompt prompt = Begin(tmpl);
  for (const auto& d : demos) {
    const std::string t2 = probe.Render(d.question);
    AddChunk(prompt, &d.image,
             JoinFields({t2, d.relevant ? probe.r2_yes : probe.r2_no}, tmpl), tmpl);
  }
  const std::string query = probe.Render(original_question);
  CheckClean(query, tmpl);
  AddQuery(prompt, query_image, query);
  return prompt;
}

std::string_view YesNoName(YesNo v) {
  switch (v) {
    case YesNo::kYes: return "yes";
    case YesNo::kNo: return "no";
    case YesNo::kUnknown: return "unknown";
  }
  return "unknown";
}

YesNo ParseYesNo(std::string_view raw) {
  const std::string_view trimmed = Trim(raw);
  std::size_t end = 0;
  while (end < trimmed.size() &&
         !std::isspace(static_cast<unsigned char>(trimmed[end]))) {
    ++end;
  }
  std::string token = ToLower(trimmed.substr(0, end));
  while (!token.empty() && std::ispunct(static_cast<unsigned char>(token.back()))) {
    token.pop_back();
  }
  if (token == "yes") return YesNo::kYes;
  if (token == "no") return YesNo::kNo;
  return YesNo::kUnknown;
}

Correction CorrectAnswer(std::string_view o1, std::string_view o2,
                         const RelevanceProbe& probe) {
  Correction out;
  out.answer = std::string(o1);
  out.probe = ParseYesNo(o2);
  out.probe_unparsed = out.probe == YesNo::kUnknown;
  if (out.probe == YesNo::kNo &&
      NormalizeAnswer(o1) != NormalizeAnswer(probe.abstention_keyword)) {
    out.answer = probe.abstention_keyword;
    out.corrected = true;
  }
  return out;
}

std::string ParseAnswer(std::string_view raw,
                        std::span<const std::string> stop_markers,
                        AnswerMode mode) {
  std::size_t cut = raw.size();
  for (const auto& m : stop_markers) {
    if (m.empty()) continue;
    cut = std::min(cut, raw.find(m));
  }
  std::string out(Trim(raw.substr(0, cut)));
  if (mode == AnswerMode::kVqa) out = ToLower(out);
  return out;
}

MultitaskOutput SplitMultitask(std::string_view continuation,
                               std::string_view t2_cue) {
  MultitaskOutput out;
  const std::size_t at = t2_cue.empty() ? std::string_view::npos
                                        : continuation.find(t2_cue);
  if (at == std::string_view::npos) {
    out.r1 = std::string(Trim(continuation));
    return out;
  }
  out.cue_found = true;
  out.r1 = std::string(Trim(continuation.substr(0, at)));
  out.r2 = std::string(Trim(continuation.substr(at + t2_cue.size())));
  return out;
}

}  // namespace evalign
