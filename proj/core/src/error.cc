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

#include "evalign/error.h"

namespace evalign {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kVocabulary: return "vocabulary";
    case ErrorKind::kConsistency: return "consistency";
    case ErrorKind::kCategory: return "category";
    case ErrorKind::kSize: return "size";
    case ErrorKind::kBalance: return "balance";
    case ErrorKind::kContamination: return "contamination";
    case ErrorKind::kArity: return "arity";
    case ErrorKind::kTemplate: return "template";
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kEndpoint: return "endpoint";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kJudgeProtocol: return "judge protocol";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kPortBusy: return "port busy";
    case ErrorKind::kScript: return "script";
  }
  return "unknown";
}

}  // namespace evalign
