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

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "evalign/error.h"
#include "evalign/text.h"
#include "support/fixtures.h"
#include "support/oracles.h"
#include "support/prompt_gen.h"
#include "support/wire_mutations.h"

namespace evalign {
namespace {

using namespace ::evalign::testing;  // NOLINT

std::string Golden(const std::string& name) { return Slurp(GoldenPath("prompts/" + name)); }

template <typename Fn>
ErrorKind KindOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no evalign::Error thrown";
  return ErrorKind::kIo;
}

const PromptTemplate kTmpl;

// ---------------------------------------------------------------------------
// Golden wire strings.

TEST(GoldenPromptTest, Icl) {
  for (std::size_t n : {0u, 1u, 2u, 4u}) {
    const auto demos = FirstN(IclDemos(), n);
    const InterleavedPrompt p = AssembleIcl(demos, kQueryImage, kQueryT, kTmpl);
    EXPECT_EQ(Serialize(p, kTmpl), Golden("icl_n" + std::to_string(n) + ".txt")) << n;
    EXPECT_EQ(p.ImageCount(), n + 1);
  }
}

TEST(GoldenPromptTest, IclWithInstruction) {
  PromptTemplate tmpl;
  tmpl.task_instruction = kAbstentionInstruction;
  const auto demos = FirstN(IclDemos(), 2);
  EXPECT_EQ(Serialize(AssembleIcl(demos, kQueryImage, kQueryT, tmpl), tmpl),
            Golden("icl_n2_instr.txt"));
}

TEST(GoldenPromptTest, ZeroShot) {
  const auto demos = FirstN(IclDemos(), 2);
  EXPECT_EQ(Serialize(AssembleZeroShot(demos, kQueryImage, kQueryT, kTmpl), kTmpl),
            Golden("zero_shot.txt"));
  PromptTemplate tmpl;
  tmpl.task_instruction = kAbstentionInstruction;
  EXPECT_EQ(Serialize(AssembleZeroShot(demos, kQueryImage, kQueryT, tmpl), tmpl),
            Golden("zero_shot_instr.txt"));
}

TEST(GoldenPromptTest, ChainOfHindsight) {
  for (std::size_t n : {1u, 2u, 4u}) {
    const auto demos = FirstN(CohDemos(), n);
    EXPECT_EQ(Serialize(AssembleCoh(demos, kQueryImage, kCohQueryT, "a good explanation is:", kTmpl),
                        kTmpl),
              Golden("coh_n" + std::to_string(n) + ".txt"));
  }
}

TEST(GoldenPromptTest, Multitask) {
  for (std::size_t n : {1u, 2u, 4u}) {
    const auto demos = FirstN(MtDemos(), n);
    EXPECT_EQ(Serialize(AssembleMultitask(demos, kQueryImage, kQueryT, kTmpl), kTmpl),
              Golden("mt_n" + std::to_string(n) + ".txt"));
  }
}

TEST(GoldenPromptTest, SelfCorrectionStepTwo) {
  for (std::size_t n : {0u, 1u, 2u, 4u}) {
    const auto demos = FirstN(ScDemos(), n);
    EXPECT_EQ(Serialize(AssembleSelfCorrection(demos, RelevanceProbe{}, kQueryImage, kScQuestion,
                                               kTmpl),
                        kTmpl),
              Golden("sc_step2_n" + std::to_string(n) + ".txt"));
  }
}

// ---------------------------------------------------------------------------
// Assembler examples.

TEST(AssembleIclTest, EmptyContext) {
  const InterleavedPrompt p =
      AssembleIcl({}, Img("q"), "Question: how many dogs? Answer:", kTmpl);
  ASSERT_EQ(p.segments.size(), 2u);
  EXPECT_TRUE(p.segments[0].is_image());
  EXPECT_EQ(p.segments[1].text(), "Question: how many dogs? Answer:");
}

TEST(AssembleIclTest, OneDemonstrationSegments) {
  const std::vector<Demonstration> demos{{Img("img1"), "Question: what color? Answer:", "red"}};
  const InterleavedPrompt p = AssembleIcl(demos, Img("q"), "Question: how many? Answer:", kTmpl);
  ASSERT_EQ(p.segments.size(), 4u);
  EXPECT_EQ(p.segments[0].image().id, "img1");
  EXPECT_EQ(p.segments[1].text(), "Question: what color? Answer: red<|endofchunk|>");
  EXPECT_EQ(p.segments[2].image().id, "q");
  EXPECT_EQ(p.segments[3].text(), "Question: how many? Answer:");
  EXPECT_EQ(p.QueryText(), "Question: how many? Answer:");
}

TEST(AssembleIclTest, MarkerInsideFieldIsContamination) {
  const std::vector<Demonstration> demos{{Img("a"), "look <image> here", "x"}};
  EXPECT_EQ(KindOf([&] { AssembleIcl(demos, Img("q"), "Q", kTmpl); }), ErrorKind::kContamination);
  EXPECT_EQ(KindOf([&] { AssembleIcl({}, Img("q"), "Q <|endofchunk|>", kTmpl); }),
            ErrorKind::kContamination);
}

TEST(AssembleZeroShotTest, OneImageThreeTexts) {
  const auto demos = FirstN(IclDemos(), 2);
  const InterleavedPrompt a = AssembleZeroShot(demos, kQueryImage, kQueryT, kTmpl);
  EXPECT_EQ(a.ImageCount(), 1u);
  EXPECT_EQ(a.TextCount(), 3u);
  EXPECT_EQ(a, AssembleZeroShot(demos, kQueryImage, kQueryT, kTmpl));
}

TEST(AssembleZeroShotTest, ArityAndContamination) {
  EXPECT_EQ(KindOf([] { AssembleZeroShot(FirstN(IclDemos(), 1), kQueryImage, kQueryT, kTmpl); }),
            ErrorKind::kArity);
  EXPECT_EQ(KindOf([] { AssembleZeroShot(FirstN(IclDemos(), 3), kQueryImage, kQueryT, kTmpl); }),
            ErrorKind::kArity);
  std::vector<Demonstration> demos = FirstN(IclDemos(), 2);
  demos[1].r = "red<|endofchunk|>";
  EXPECT_EQ(KindOf([&] { AssembleZeroShot(demos, kQueryImage, kQueryT, kTmpl); }),
            ErrorKind::kContamination);
}

TEST(AssembleCohTest, FieldOrderAndQueryForm) {
  const auto demos = FirstN(CohDemos(), 1);
  const InterleavedPrompt p =
      AssembleCoh(demos, kQueryImage, kCohQueryT, "a good explanation is:", kTmpl);
  const std::string& chunk = p.segments[1].text();
  const auto t = chunk.find(demos[0].t);
  const auto tp = chunk.find(demos[0].t_pos);
  const auto rp = chunk.find(demos[0].r_pos);
  const auto tn = chunk.find(demos[0].t_neg);
  const auto rn = chunk.rfind(demos[0].r_neg);
  EXPECT_LT(t, tp);
  EXPECT_LT(tp, rp);
  EXPECT_LT(rp, tn);
  EXPECT_LT(tn, rn);
  EXPECT_EQ(p.QueryText().find("a bad explanation is:"), std::string_view::npos);
  EXPECT_TRUE(p.QueryText().ends_with("a good explanation is:"));
  EXPECT_EQ(AssembleCoh(FirstN(CohDemos(), 2), kQueryImage, kCohQueryT, "a good explanation is:",
                        kTmpl)
                .ImageCount(),
            3u);
  EXPECT_EQ(KindOf([] {
              AssembleCoh({}, kQueryImage, kCohQueryT, "a good explanation is:", kTmpl);
            }),
            ErrorKind::kArity);
}

TEST(AssembleMultitaskTest, ChunkOrderAndArity) {
  const std::vector<MultitaskDemonstration> demos{
      {Img("a"), "Question: what is the man doing Answer:", "surfing", "because",
       "he is on a wave"}};
  const InterleavedPrompt p =
      AssembleMultitask(demos, kQueryImage, "Question: what room is this Answer:", kTmpl);
  EXPECT_EQ(p.segments[1].text(),
            "Question: what is the man doing Answer: surfing because he is on a wave<|endofchunk|>");
  EXPECT_EQ(p.QueryText(), "Question: what room is this Answer:");
  EXPECT_EQ(KindOf([] { AssembleMultitask({}, kQueryImage, kQueryT, kTmpl); }), ErrorKind::kArity);
}

TEST(AssembleSelfCorrectionTest, QuotesQuestionOnce) {
  const InterleavedPrompt p =
      AssembleSelfCorrection({}, RelevanceProbe{}, kQueryImage, "what is the cat reading", kTmpl);
  EXPECT_EQ(p.QueryText(),
            "Is the following question relevant to the image: \"what is the cat reading\"? Answer:");
  EXPECT_EQ(CountOccurrences(p.QueryText(), "what is the cat reading"), 1u);
  const std::vector<RelevanceExample> demos{{Img("a"), "what is the bus eating", false}};
  const InterleavedPrompt q =
      AssembleSelfCorrection(demos, RelevanceProbe{}, kQueryImage, "q", kTmpl);
  EXPECT_TRUE(q.segments[1].text().ends_with("no<|endofchunk|>"));
}

TEST(AssembleSelfCorrectionTest, PlaceholderCountIsValidated) {
  RelevanceProbe two;
  two.t2_template = "{q} or {q}?";
  EXPECT_EQ(KindOf([&] { AssembleSelfCorrection({}, two, kQueryImage, "q", kTmpl); }),
            ErrorKind::kTemplate);
  RelevanceProbe none;
  none.t2_template = "relevant?";
  EXPECT_EQ(KindOf([&] { none.Validate(); }), ErrorKind::kTemplate);
}

TEST(PromptTemplateTest, MarkersMustBeNonEmptyAndDistinct) {
  PromptTemplate t;
  t.chunk_end = "";
  EXPECT_EQ(KindOf([&] { t.Validate(); }), ErrorKind::kTemplate);
  t.chunk_end = "<image>";
  EXPECT_EQ(KindOf([&] { t.Validate(); }), ErrorKind::kTemplate);
}

// ---------------------------------------------------------------------------
// Output parsing.

TEST(ParseYesNoTest, Examples) {
  EXPECT_EQ(ParseYesNo("Yes, it does."), YesNo::kYes);
  EXPECT_EQ(ParseYesNo(" no"), YesNo::kNo);
  EXPECT_EQ(ParseYesNo("NO."), YesNo::kNo);
  EXPECT_EQ(ParseYesNo("maybe"), YesNo::kUnknown);
  EXPECT_EQ(ParseYesNo(""), YesNo::kUnknown);
  EXPECT_EQ(ParseYesNo("nope"), YesNo::kUnknown);
}

TEST(CorrectAnswerTest, Examples) {
  const RelevanceProbe probe;
  EXPECT_EQ(CorrectAnswer("red", "no", probe).answer, "doesnotapply");
  EXPECT_TRUE(CorrectAnswer("red", "no", probe).corrected);
  EXPECT_EQ(CorrectAnswer("red", "yes", probe).answer, "red");
  EXPECT_EQ(CorrectAnswer("doesnotapply", "yes", probe).answer, "doesnotapply");
  const Correction unparsed = CorrectAnswer("red", "perhaps", probe);
  EXPECT_EQ(unparsed.answer, "red");
  EXPECT_TRUE(unparsed.probe_unparsed);
}

TEST(CorrectAnswerTest, IdentityUnlessProbeSaysNo) {
  oracle::Gen gen(21);
  const RelevanceProbe probe;
  const std::vector<std::string> replies{"yes", "Yes.", "no", "No,", "maybe", "", " yes sir",
                                         "n o"};
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string o1 = gen.Word(8);
    std::string o2 = gen.Pick(replies);
    if (gen.Coin(0.3)) o2 = gen.Word(4);
    const Correction c = CorrectAnswer(o1, o2, probe);
    if (ParseYesNo(o2) != YesNo::kNo) {
      EXPECT_EQ(c.answer, o1);
      EXPECT_FALSE(c.corrected);
    } else {
      EXPECT_EQ(c.answer, "doesnotapply");
    }
  }
}

TEST(ParseAnswerTest, Examples) {
  const std::vector<std::string> stops{"<|endofchunk|>", "<image>", "\n"};
  EXPECT_EQ(ParseAnswer("red<|endofchunk|><image>Question:", stops), "red");
  EXPECT_EQ(ParseAnswer(" Two dogs.\nQuestion:", stops), "Two dogs.");
  EXPECT_EQ(ParseAnswer(" Two dogs.\nQuestion:", stops, AnswerMode::kVqa), "two dogs.");
  EXPECT_EQ(ParseAnswer("", stops), "");
}

TEST(SplitMultitaskTest, SplitsAtCue) {
  const std::string cue = "Is the question relevant to the image? Answer:";
  const MultitaskOutput a = SplitMultitask("red " + cue + " yes", cue);
  EXPECT_EQ(a.r1, "red");
  EXPECT_EQ(a.r2, "yes");
  EXPECT_TRUE(a.cue_found);
  const MultitaskOutput b = SplitMultitask(" red ", cue);
  EXPECT_EQ(b.r1, "red");
  EXPECT_FALSE(b.cue_found);
}

// ---------------------------------------------------------------------------
// Grammar and properties over generated prompts.

TEST(WireGrammarTest, AcceptsAssemblerOutputAndRoundTrips) {
  oracle::Gen gen(31);
  for (int trial = 0; trial < 500; ++trial) {
    PromptTemplate tmpl;
    if (gen.Coin(0.3)) tmpl.task_instruction = "Here are a few illustration examples:";
    const InterleavedPrompt p = RandomPrompt(gen, tmpl);
    const std::string wire = Serialize(p, tmpl);
    ASSERT_TRUE(IsWellFormed(wire, tmpl)) << wire;
    const auto images = ImagesOf(p);
    EXPECT_EQ(ParseWire(wire, tmpl, images), p);
  }
}

TEST(WireGrammarTest, RejectsMutations) {
  oracle::Gen gen(37);
  for (int trial = 0; trial < 1000; ++trial) {
    const InterleavedPrompt p = RandomPrompt(gen, kTmpl);
    const std::string wire = Serialize(p, kTmpl);
    const std::string bad = Mutate(wire, kTmpl, static_cast<std::size_t>(trial), gen);
    EXPECT_FALSE(IsWellFormed(bad, kTmpl)) << "mutation " << trial % 10 << ": " << bad;
  }
}

TEST(WireGrammarTest, InstructionPrefixIsRequiredWhenConfigured) {
  PromptTemplate tmpl;
  tmpl.task_instruction = kAbstentionInstruction;
  EXPECT_FALSE(IsWellFormed(Golden("icl_n2.txt"), tmpl));
  EXPECT_TRUE(IsWellFormed(Golden("icl_n2_instr.txt"), tmpl));
  EXPECT_EQ(KindOf([&] { ParseWire("<image>", kTmpl); }), ErrorKind::kParse);
}

TEST(WireGrammarTest, EqualWireImpliesEqualSegments) {
  oracle::Gen gen(41);
  std::vector<std::pair<std::string, InterleavedPrompt>> seen;
  for (int trial = 0; trial < 400; ++trial) {
    // A tiny alphabet makes collisions likely enough to exercise the check.
    oracle::Gen local(gen.Next() % 64);
    InterleavedPrompt p = RandomPrompt(local, kTmpl);
    for (auto& s : p.segments) {
      if (s.is_image()) s = Segment::Image(Img("x"));
    }
    const std::string wire = Serialize(p, kTmpl);
    for (const auto& [w, q] : seen) {
      if (w == wire) {
        EXPECT_EQ(q, p);
      }
    }
    seen.emplace_back(wire, p);
  }
}

TEST(InstructionPrefixTest, OnlyAPrefixChanges) {
  oracle::Gen gen(43);
  for (int trial = 0; trial < 200; ++trial) {
    oracle::Gen a(trial + 1), b(trial + 1);
    PromptTemplate with;
    with.task_instruction = gen.Word(20) + " examples:";
    const std::string plain = Serialize(RandomPrompt(a, kTmpl), kTmpl);
    const std::string prefixed = Serialize(RandomPrompt(b, with), with);
    const std::string prefix = *with.task_instruction + with.instruction_separator;
    ASSERT_EQ(prefixed.size(), prefix.size() + plain.size());
    EXPECT_EQ(prefixed.substr(0, prefix.size()), prefix);
    EXPECT_EQ(prefixed.substr(prefix.size()), plain);
  }
}

TEST(ImageCountTest, IclHasNPlusOneZeroShotHasOne) {
  oracle::Gen gen(47);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen.Below(10);
    std::vector<Demonstration> d;
    for (std::size_t i = 0; i < n; ++i) d.push_back({Img(gen.Word()), gen.Word(), gen.Word()});
    EXPECT_EQ(AssembleIcl(d, Img("q"), "t", kTmpl).ImageCount(), n + 1);
    d.resize(2, Demonstration{Img("z"), "t", "r"});
    EXPECT_EQ(AssembleZeroShot(d, Img("q"), "t", kTmpl).ImageCount(), 1u);
  }
}

}  // namespace
}  // namespace evalign
