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

#include <gtest/gtest.h>

#include <string>

#include "evalign/error.h"

namespace evalign {
namespace {

TEST(TemplatesTest, DefaultsMatchBuiltInMarkers) {
  const TemplateSet& t = DefaultTemplates();
  EXPECT_EQ(t.prompt.image_marker, "<image>");
  EXPECT_EQ(t.prompt.chunk_end, "<|endofchunk|>");
  EXPECT_EQ(t.prompt.field_separator, " ");
  EXPECT_EQ(t.prompt.instruction_separator, "\n");
  EXPECT_FALSE(t.prompt.task_instruction.has_value());
  EXPECT_EQ(t.cues, TaskCues{});
  EXPECT_EQ(t.probe.t2_template, RelevanceProbe{}.t2_template);
  for (const char* axis : {"hallucination", "abstention", "compositionality", "explainability"}) {
    EXPECT_TRUE(t.task_instructions.count(axis)) << axis;
  }
}

TEST(TemplatesTest, PartialFileKeepsDefaults) {
  const TemplateSet t = ParseTemplates(
      R"({"markers": {"image": "<img>"}, "cues": {"vqa": "Q: {question} A:"}})");
  EXPECT_EQ(t.prompt.image_marker, "<img>");
  EXPECT_EQ(t.prompt.chunk_end, "<|endofchunk|>");
  EXPECT_EQ(t.cues.vqa, "Q: {question} A:");
  EXPECT_EQ(t.cues.caption, "Output:");
}

TEST(TemplatesTest, RejectsBadDocuments) {
  auto kind = [](const std::string& doc) {
    try {
      ParseTemplates(doc);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kIo;
  };
  EXPECT_EQ(kind("{not json"), ErrorKind::kParse);
  EXPECT_EQ(kind("[]"), ErrorKind::kTemplate);
  EXPECT_EQ(kind(R"({"markers": {"image": 3}})"), ErrorKind::kTemplate);
  EXPECT_EQ(kind(R"({"markers": {"image": "<x>", "chunk_end": "<x>"}})"), ErrorKind::kTemplate);
  EXPECT_EQ(kind(R"({"probe": {"template": "relevant?"}})"), ErrorKind::kTemplate);
  EXPECT_EQ(kind(R"({"task_instructions": {"abstention": 1}})"), ErrorKind::kTemplate);
}

TEST(FillTest, SubstitutesEveryPlaceholder) {
  EXPECT_EQ(Fill("Question: {question} Answer: {answer}", {{"question", "q"}, {"answer", "a"}}),
            "Question: q Answer: a");
  EXPECT_EQ(Fill("no placeholders", {}), "no placeholders");
  EXPECT_EQ(Fill("{x}", {{"x", "{y}"}}), "{y}");
  try {
    Fill("Question: {question}", {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTemplate);
  }
}

}  // namespace
}  // namespace evalign
