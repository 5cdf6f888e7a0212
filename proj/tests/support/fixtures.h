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

// Shared inputs for tests. The prompt demonstrations below are the same ones
// the checked-in golden wire strings under tests/golden/prompts were built
// from.

#ifndef EVALIGN_TESTS_SUPPORT_FIXTURES_H_
#define EVALIGN_TESTS_SUPPORT_FIXTURES_H_

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evalign/promptkit.h"

namespace evalign::testing {

inline std::string DataPath(const std::string& name) {
  return std::string(EVALIGN_TEST_DATA_DIR) + "/" + name;
}

inline std::string GoldenPath(const std::string& name) {
  return std::string(EVALIGN_GOLDEN_DIR) + "/" + name;
}

inline std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ImageRef Img(const std::string& uri) { return {uri, uri}; }

inline const ImageRef kQueryImage = Img("img/q.jpg");

inline std::vector<Demonstration> IclDemos() {
  return {{Img("img/a.jpg"), "Question: what color is the car? Answer:", "red"},
          {Img("img/b.jpg"), "Question: how many dogs are there? Answer:", "2"},
          {Img("img/c.jpg"), "Question: what is the cat reading? Answer:", "doesnotapply"},
          {Img("img/d.jpg"), "Question: what sport is this? Answer:", "tennis"}};
}

inline const std::string kQueryT = "Question: what is on the table? Answer:";

inline const std::string kAbstentionInstruction =
    "Answer the following questions about the image, give short answers, if "
    "you do not know the answer or the question is not relevant to the image "
    "say doesnotapply. Here is few illustration examples:";

inline std::vector<CohDemonstration> CohDemos() {
  const std::string pos = "a good explanation is:";
  const std::string neg = "a bad explanation is:";
  return {{Img("img/a.jpg"), "Question: what is the man doing? Answer: surfing", pos,
           "he is riding a wave on a board", neg, "because it is"},
          {Img("img/b.jpg"), "Question: what room is this? Answer: kitchen", pos,
           "there is a stove and a fridge", neg, "it is a room"},
          {Img("img/c.jpg"), "Question: is it raining? Answer: yes", pos,
           "people are holding umbrellas", neg, "the sky"},
          {Img("img/d.jpg"), "Question: what animal is this? Answer: giraffe", pos,
           "it has a long neck and spots", neg, "animals are big"}};
}

inline const std::string kCohQueryT = "Question: what is the woman holding? Answer: umbrella";

inline std::vector<MultitaskDemonstration> MtDemos() {
  const std::string rel = "Is the question relevant to the image? Answer:";
  return {{Img("img/a.jpg"), "Question: what color is the car? Answer:", "red", rel, "yes"},
          {Img("img/b.jpg"), "Question: what is the cat reading? Answer:", "doesnotapply", rel, "no"},
          {Img("img/c.jpg"), "Question: how many dogs are there? Answer:", "2", rel, "yes"},
          {Img("img/d.jpg"), "Question: what is the bus eating? Answer:", "doesnotapply", rel, "no"}};
}

inline std::vector<RelevanceExample> ScDemos() {
  return {{Img("img/a.jpg"), "what color is the car", true},
          {Img("img/b.jpg"), "what is the cat reading", false},
          {Img("img/c.jpg"), "how many dogs are there", true},
          {Img("img/d.jpg"), "what is the bus eating", false}};
}

inline const std::string kScQuestion = "what is the dog reading";

template <typename T>
std::vector<T> FirstN(const std::vector<T>& v, std::size_t n) {
  return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n)};
}

}  // namespace evalign::testing

#endif  // EVALIGN_TESTS_SUPPORT_FIXTURES_H_
