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

#ifndef EVALIGN_ERROR_H_
#define EVALIGN_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace evalign {

enum class ErrorKind {
  kParse,
  kVocabulary,
  kConsistency,
  kCategory,
  kSize,
  kBalance,
  kContamination,
  kArity,
  kTemplate,
  kInvalidArgument,
  kEndpoint,
  kProtocol,
  kCapacity,
  kJudgeProtocol,
  kConfig,
  kIo,
  kPortBusy,
  kScript,
};

std::string_view ErrorKindName(ErrorKind kind);

// All harness failures surface as this type; `kind()` lets callers branch
// without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(ErrorKindName(kind)) + " error: " +
                           message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace evalign

#endif  // EVALIGN_ERROR_H_
