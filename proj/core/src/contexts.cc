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

#include "robner/contexts.h"

#include <nlohmann/json.hpp>

#include "robner/error.h"

namespace robner {

using nlohmann::json;

std::string WriteContextsJsonl(const std::vector<ContextRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json j = {{"sentence_id", r.sentence_id},
              {"backend", r.backend},
              {"mode", r.mode},
              {"contexts", r.contexts}};
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<ContextRecord> ParseContextsJsonl(std::string_view text) {
  std::vector<ContextRecord> records;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      records.push_back({j.at("sentence_id").get<std::string>(),
                         j.at("backend").get<std::string>(),
                         j.at("mode").get<std::string>(),
                         j.at("contexts").get<std::vector<std::string>>()});
    } catch (const json::exception& e) {
      throw DataError("contexts line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace robner
