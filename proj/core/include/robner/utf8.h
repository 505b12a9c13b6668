// Copyright 2026 The robner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ROBNER_UTF8_H_
#define ROBNER_UTF8_H_

#include <string>
#include <string_view>
#include <vector>

namespace robner::utf8 {

// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD so that
// every input byte sequence yields a well-defined result.
std::u32string Decode(std::string_view text);

std::string Encode(std::u32string_view text);
std::string Encode(char32_t cp);

// Splits text into per-code-point UTF-8 strings.
std::vector<std::string> SplitChars(std::string_view text);

bool IsSpace(char32_t cp);

// Whitespace-delimited tokens; runs of whitespace never produce empty tokens.
std::vector<std::string> SplitWhitespace(std::string_view text);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace robner::utf8

#endif  // ROBNER_UTF8_H_
