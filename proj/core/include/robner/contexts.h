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

#ifndef ROBNER_CONTEXTS_H_
#define ROBNER_CONTEXTS_H_

#include <string>
#include <string_view>
#include <vector>

namespace robner {

// Retrieved contexts of one sentence, as stored between the retrieval and
// training stages.
struct ContextRecord {
  std::string sentence_id;
  std::string backend;
  std::string mode;
  std::vector<std::string> contexts;

  bool operator==(const ContextRecord&) const = default;
};

// One JSON object per line: {sentence_id, backend, mode, contexts}.
std::string WriteContextsJsonl(const std::vector<ContextRecord>& records);
std::vector<ContextRecord> ParseContextsJsonl(std::string_view text);

}  // namespace robner

#endif  // ROBNER_CONTEXTS_H_
