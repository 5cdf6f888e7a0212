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

#include "evalign/templates.h"

#include "embedded_data.h"
#include "evalign/error.h"
#include "json.hpp"

namespace evalign {

using json = nlohmann::json;

namespace {

void Take(const json& obj, const char* key, std::string& into) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_string()) {
    throw Error(ErrorKind::kTemplate, std::string("template field '") + key +
                                          "' must be a string");
  }
  into = it->get<std::string>();
}

const json& Section(const json& doc, const char* key) {
  static const json kEmpty = json::object();
  auto it = doc.find(key);
  if (it == doc.end()) return kEmpty;
  if (!it->is_object()) {
    throw Error(ErrorKind::kTemplate, std::string("template section '") + key +
                                          "' must be an object");
  }
  return *it;
}

}  // namespace

TemplateSet ParseTemplates(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("template file: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kTemplate, "template file must be an object");

  TemplateSet set;
  const json& markers = Section(doc, "markers");
  Take(markers, "image", set.prompt.image_marker);
  Take(markers, "chunk_end", set.prompt.chunk_end);
  const json& seps = Section(doc, "separators");
  Take(seps, "field", set.prompt.field_separator);
  Take(seps, "instruction", set.prompt.instruction_separator);

  const json& cues = Section(doc, "cues");
  TaskCues& c = set.cues;
  Take(cues, "caption", c.caption);
  Take(cues, "objects", c.objects);
  Take(cues, "vqa", c.vqa);
  Take(cues, "relevance", c.relevance);
  Take(cues, "itm", c.itm);
  Take(cues, "itm_yes", c.itm_yes);
  Take(cues, "itm_no", c.itm_no);
  Take(cues, "explain", c.explain);
  Take(cues, "explain_context", c.explain_context);
  Take(cues, "coh_positive", c.coh_positive);
  Take(cues, "coh_negative", c.coh_negative);
  Take(cues, "because", c.because);
  Take(cues, "instruction", c.instruction);

  const json& probe = Section(doc, "probe");
  Take(probe, "template", set.probe.t2_template);
  Take(probe, "yes", set.probe.r2_yes);
  Take(probe, "no", set.probe.r2_no);
  Take(probe, "abstention_keyword", set.probe.abstention_keyword);

  for (const auto& [axis, value] : Section(doc, "task_instructions").items()) {
    if (!value.is_string()) {
      throw Error(ErrorKind::kTemplate, "task instruction for '" + axis +
                                            "' must be a string");
    }
    set.task_instructions[axis] = value.get<std::string>();
  }

  set.prompt.Validate();
  set.probe.Validate();
  return set;
}

TemplateSet LoadTemplates(const std::string& path) {
  return ParseTemplates(ReadTextFile(path));
}

std::string_view DefaultTemplatesJson() { return embedded::templates_json(); }

const TemplateSet& DefaultTemplates() {
  static const TemplateSet kDefaults = ParseTemplates(DefaultTemplatesJson());
  return kDefaults;
}

std::string Fill(std::string_view pattern,
                 const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < pattern.size()) {
    const std::size_t open = pattern.find('{', pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = pattern.find('}', open);
    if (close == std::string_view::npos) break;
    const std::string key(pattern.substr(open + 1, close - open - 1));
    out.append(pattern.substr(pos, open - pos));
    auto it = values.find(key);
    if (it == values.end()) {
      throw Error(ErrorKind::kTemplate, "no value for placeholder {" + key + "} in '" +
                                            std::string(pattern) + "'");
    }
    out += it->second;
    pos = close + 1;
  }
  out.append(pattern.substr(pos));
  return out;
}

}  // namespace evalign
