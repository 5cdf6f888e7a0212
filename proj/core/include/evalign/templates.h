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

#ifndef EVALIGN_TEMPLATES_H_
#define EVALIGN_TEMPLATES_H_

#include <map>
#include <string>
#include <string_view>

#include "evalign/promptkit.h"

namespace evalign {

// Per-task cue strings. Placeholders in braces are filled by Fill().
struct TaskCues {
  std::string caption = "Output:";
  std::string objects = "There is only these objects:";
  std::string vqa = "Question: {question} Answer:";
  std::string relevance = "Is the question relevant to the image? Answer:";
  std::string itm = "Question: Does the caption \"{caption}\" describe the image? Answer:";
  std::string itm_yes = "yes";
  std::string itm_no = "no";
  std::string explain = "Question: {question} Answer: {answer} Explanation:";
  std::string explain_context = "Question: {question} Answer: {answer}";
  std::string coh_positive = "a good explanation is:";
  std::string coh_negative = "a bad explanation is:";
  std::string because = "because";
  std::string instruction = "Instruction: {instruction} Response:";

  friend bool operator==(const TaskCues&, const TaskCues&) = default;
};

// Everything a template file configures: markers and separators, task
// cues, the self-correction probe and the optional per-axis instruction
// prefixes (keyed by axis name).
struct TemplateSet {
  PromptTemplate prompt;
  TaskCues cues;
  RelevanceProbe probe;
  std::map<std::string, std::string> task_instructions;
};

// The bundled defaults (data/templates.json).
const TemplateSet& DefaultTemplates();
std::string_view DefaultTemplatesJson();

// Missing keys keep their defaults. Throws kTemplate / kParse.
TemplateSet ParseTemplates(std::string_view json);
TemplateSet LoadTemplates(const std::string& path);

// Replaces every "{key}" with its value. Throws kTemplate when a placeholder
// in `pattern` has no value.
std::string Fill(std::string_view pattern,
                 const std::map<std::string, std::string>& values);

}  // namespace evalign

#endif  // EVALIGN_TEMPLATES_H_
