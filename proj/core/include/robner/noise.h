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

// Noisy-channel corruption of clean text.
//
// The typo channel interleaves an empty-symbol slot before, between and after
// the letters of every word. Each slot becomes a random alphabet character
// with probability p/3; each letter is deleted with probability p/3 or
// replaced by a different alphabet character with probability p/3. Spaces are
// never touched, so the token count is preserved.
//
// The OCR-like channel works on token sequences and may change their length:
// visually confusable substitutions, intra-token splits, inter-token merges
// and whole-token drops.

#ifndef ROBNER_NOISE_H_
#define ROBNER_NOISE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "robner/corpus.h"

namespace robner {

struct TypoChannel {
  double p = 0.0;
  // Sorted, distinct single-character strings. Must be nonempty when p > 0.
  std::vector<std::string> alphabet;
  std::uint64_t seed = 0;

  void Validate() const;
};

// Every non-whitespace character observed in the corpus, sorted.
std::vector<std::string> AlphabetFromCorpus(const Dataset& dataset);

struct TypoStats {
  std::size_t letter_sites = 0;
  std::size_t slot_sites = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t substitutions = 0;
  // Words whose letters were all deleted; they are restored unchanged so the
  // token count stays fixed. The counts above record every draw, including
  // those of restored words.
  std::size_t restored_words = 0;
};

// Corrupts one sentence using an RNG seeded from channel.seed.
std::string InduceTypos(std::string_view text, const TypoChannel& channel,
                        TypoStats* stats = nullptr);

// Corrupts every sentence with the per-sentence stream
// DeriveSeed(channel.seed, index). Labels are carried over unchanged.
Dataset InduceTypos(const Dataset& dataset, const TypoChannel& channel,
                    TypoStats* stats = nullptr);

struct ConfusionEntry {
  std::string target;
  double weight = 1.0;

  bool operator==(const ConfusionEntry&) const = default;
};

// source string -> weighted replacements. Sources may span several
// characters ("rn" -> "m").
using ConfusionTable = std::map<std::string, std::vector<ConfusionEntry>>;

ConfusionTable DefaultConfusionTable();

// Lines of "source<TAB>target<TAB>weight"; '#' starts a comment line.
ConfusionTable ParseConfusionTable(std::string_view text);
std::string WriteConfusionTable(const ConfusionTable& table);

struct OcrChannel {
  ConfusionTable confusions = DefaultConfusionTable();
  double p_sub = 0.0;    // per confusable site
  double p_split = 0.0;  // per boundary between two characters of a token
  double p_merge = 0.0;  // per boundary between two input tokens
  double p_drop = 0.0;   // per token
  std::uint64_t seed = 0;

  void Validate() const;
};

// Four increasing noise levels, calibrated so that the corpus-level token
// error rate on short social-media-like sentences lands near 2.5%, 8%, 14%
// and 26%. level is 1..4.
OcrChannel OcrPreset(int level, std::uint64_t seed = 0);

struct OcrResult {
  std::vector<std::string> tokens;
  // Set when every token was dropped.
  bool empty = false;
};

OcrResult InduceOcr(const std::vector<std::string>& tokens,
                    const OcrChannel& channel);

// Splits tokens[token_index] before code point char_pos (0 < char_pos < len).
std::vector<std::string> SplitTokenAt(const std::vector<std::string>& tokens,
                                      std::size_t token_index,
                                      std::size_t char_pos);

// Joins tokens[index] and tokens[index + 1].
std::vector<std::string> MergeTokens(const std::vector<std::string>& tokens,
                                     std::size_t index);

// Sum of character-level edit distances over the sum of gold lengths (both in
// code points). Sentence i of one list is compared with sentence i of the
// other; sentences are the space-joined token strings.
double TokenErrorRate(const std::vector<std::string>& noisy_sentences,
                      const std::vector<std::string>& gold_sentences);
double TokenErrorRate(const Dataset& noisy, const Dataset& gold);

}  // namespace robner

#endif  // ROBNER_NOISE_H_
