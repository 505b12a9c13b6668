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

// Labeled sentences, CoNLL I/O, the BIO label set and the word/character
// vocabulary used by the encoder.

#ifndef ROBNER_CORPUS_H_
#define ROBNER_CORPUS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace robner {

inline constexpr std::string_view kOutsideLabel = "O";

// Surface form that always tokenizes to the reserved separator id. Context
// renderers use it to join multiple retrieved hits.
inline constexpr std::string_view kSeparatorToken = "</s>";

struct LabeledSentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::string> labels;

  bool operator==(const LabeledSentence&) const = default;
};

using Dataset = std::vector<LabeledSentence>;

// Tokens joined by single spaces.
std::string SentenceText(const std::vector<std::string>& tokens);

struct BioLabel {
  char prefix = 'O';  // 'O', 'B' or 'I'
  std::string type;   // empty for 'O'
};

// Throws DataError for anything other than "O", "B-T" or "I-T".
BioLabel ParseBioLabel(std::string_view label);

// True when every I-T directly follows B-T or I-T.
bool IsBioValid(const std::vector<std::string>& labels);

// Throws DataError naming the first offending position.
void ValidateBio(const std::vector<std::string>& labels);

// Index 0 is "O"; entity type t (in sorted order) owns 2t+1 (B) and 2t+2 (I).
class LabelSet {
 public:
  LabelSet() : LabelSet(std::vector<std::string>{}) {}
  explicit LabelSet(std::vector<std::string> tags);

  static LabelSet FromDataset(const Dataset& dataset);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& tags() const { return tags_; }
  const std::vector<std::string>& labels() const { return labels_; }

  int Index(std::string_view label) const;
  const std::string& Label(int index) const { return labels_.at(index); }

  std::vector<int> Encode(const std::vector<std::string>& labels) const;
  std::vector<std::string> Decode(const std::vector<int>& indices) const;

  bool IsOutside(int index) const { return index == 0; }
  bool IsBegin(int index) const { return index > 0 && index % 2 == 1; }
  bool IsInside(int index) const { return index > 0 && index % 2 == 0; }
  // Entity type slot of a B/I label; -1 for "O".
  int TypeOf(int index) const { return index == 0 ? -1 : (index - 1) / 2; }

  // Whether label `to` may follow `from`; from == -1 denotes sentence start.
  bool Allowed(int from, int to) const;

 private:
  std::vector<std::string> tags_;
  std::vector<std::string> labels_;
  std::map<std::string, int, std::less<>> index_;
};

// Parses "token<TAB>label" lines with blank lines between sentences. Rejects
// wrong column counts, unknown label prefixes and invalid BIO sequences.
// Sentence ids are the zero-based sentence ordinal.
Dataset ParseConll(std::string_view text);

std::string WriteConll(const Dataset& dataset);

Dataset ReadConllFile(const std::string& path);
void WriteConllFile(const std::string& path, const Dataset& dataset);

struct SubtokenSpan {
  std::size_t word_index = 0;
  std::vector<int> subtoken_ids;
};

// Word-level vocabulary with per-character fallback. Ids are dense: the two
// reserved ids come first, then word entries, then character entries, each
// block ordered by (frequency desc, string asc).
class Vocabulary {
 public:
  static constexpr int kUnkId = 0;
  static constexpr int kSepId = 1;

  Vocabulary() = default;

  static Vocabulary Build(const Dataset& dataset, int min_freq);
  static Vocabulary Build(const std::vector<std::vector<std::string>>& sentences,
                          int min_freq);

  // Exact word hit -> one id; otherwise one id per character with unk_id for
  // unseen characters. kSeparatorToken maps to sep_id.
  SubtokenSpan Tokenize(std::string_view word, std::size_t word_index = 0) const;
  std::vector<SubtokenSpan> TokenizeSentence(
      const std::vector<std::string>& words) const;

  std::optional<int> WordId(std::string_view word) const;
  std::optional<int> CharId(std::string_view ch) const;

  int unk_id() const { return kUnkId; }
  int sep_id() const { return kSepId; }
  int min_freq() const { return min_freq_; }
  std::size_t size() const { return 2 + words_.size() + chars_.size(); }
  std::size_t word_count() const { return words_.size(); }
  std::size_t char_count() const { return chars_.size(); }

  // Text form: a header line, "word<TAB>id" lines, a "#chars" line, then
  // "char<TAB>id" lines. Entries are written in id order.
  std::string Serialize() const;
  static Vocabulary Deserialize(std::string_view text);

  bool operator==(const Vocabulary&) const = default;

 private:
  int min_freq_ = 1;
  std::map<std::string, int, std::less<>> words_;
  std::map<std::string, int, std::less<>> chars_;
};

}  // namespace robner

#endif  // ROBNER_CORPUS_H_
