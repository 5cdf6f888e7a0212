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

#ifndef EVALIGN_SRC_EMBEDDED_DATA_H_
#define EVALIGN_SRC_EMBEDDED_DATA_H_

#include <string_view>

namespace evalign::embedded {

std::string_view coco80_synonyms_tsv();
std::string_view singular_exceptions_tsv();
std::string_view templates_json();
std::string_view judge_prompt_txt();

}  // namespace evalign::embedded

#endif  // EVALIGN_SRC_EMBEDDED_DATA_H_
