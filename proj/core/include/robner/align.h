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

#ifndef ROBNER_ALIGN_H_
#define ROBNER_ALIGN_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "robner/corpus.h"

namespace robner {

enum class EditOp { kMatch, kSub, kIns, kDel };

struct AlignedEdit {
  EditOp op = EditOp::kMatch;
  // Code point offsets; -1 where the side does not take part (kIns has no
  // gold position, kDel no noisy position).
  long gold_pos = -1;
  long noisy_pos = -1;
  // The noisy code point for kMatch, kSub and kIns.
  char32_t ch = 0;
};

struct EditAlignment {
  std::vector<AlignedEdit> ops;
  std::size_t cost = 0;
  std::size_t gold_token_count = 0;
  // noisy token index -> sorted gold token indices. An empty set marks a
  // token made only of inserted characters.
  std::vector<std::vector<std::size_t>> token_map;
};

// Unit-cost Levenshtein distance over code points.
std::size_t EditDistance(std::u32string_view a, std::u32string_view b);
std::size_t EditDistance(std::string_view a, std::string_view b);

// Minimal-cost alignment of gold_text to noisy_text. Among optimal paths the
// traceback prefers match, then substitution, then deletion, then insertion.
// Tokens are maximal whitespace-free runs of each text.
EditAlignment LevenshteinAlign(std::string_view gold_text,
                               std::string_view noisy_text);

EditAlignment AlignTokens(const std::vector<std::string>& gold_tokens,
                          const std::vector<std::string>& noisy_tokens);

// Applies the alignment's edits to gold_text; yields the noisy text.
std::string ReplayEdits(std::string_view gold_text,
                        const EditAlignment& alignment);

// Rewrites every I-T that does not follow B-T/I-T as B-T.
std::vector<std::string> RepairBio(std::vector<std::string> labels);

// One label per noisy token:
//   - token aligned to gold tokens S takes the label of min(S), turning B-T
//     into I-T when an earlier noisy token already covered that gold token;
//   - token aligned to nothing is "O";
//   - a final repair pass removes orphan I-T labels.
// Throws DataError if the alignment was not built for this pair.
std::vector<std::string> ProjectLabels(
    const LabeledSentence& gold, const std::vector<std::string>& noisy_tokens,
    const EditAlignment& alignment);

// AlignTokens + ProjectLabels, keeping the gold sentence id.
LabeledSentence ProjectSentence(const LabeledSentence& gold,
                                const std::vector<std::string>& noisy_tokens);

}  // namespace robner

#endif  // ROBNER_ALIGN_H_
