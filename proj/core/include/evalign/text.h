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

#ifndef EVALIGN_TEXT_H_
#define EVALIGN_TEXT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evalign {

// ASCII lowercase; bytes >= 0x80 pass through unchanged.
std::string ToLower(std::string_view text);

std::string_view Trim(std::string_view text);

// Lowercase, punctuation removed, whitespace collapsed, leading articles
// ("a", "an", "the") dropped. Idempotent.
std::string NormalizeAnswer(std::string_view raw);

// Lowercased alphabetic runs; everything else separates tokens.
std::vector<std::string> LetterTokens(std::string_view text);

// Lowercased whitespace tokens with punctuation stripped. Used for CIDEr.
std::vector<std::string> CaptionTokens(std::string_view text);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

std::size_t CountOccurrences(std::string_view haystack, std::string_view needle);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string Digest(std::string_view bytes);

}  // namespace evalign

#endif  // EVALIGN_TEXT_H_
