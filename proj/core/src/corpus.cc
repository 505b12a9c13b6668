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

#include "robner/corpus.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "robner/error.h"
#include "robner/utf8.h"

namespace robner {

std::string SentenceText(const std::vector<std::string>& tokens) {
  return utf8::Join(tokens, " ");
}

BioLabel ParseBioLabel(std::string_view label) {
  if (label == kOutsideLabel) return {};
  if (label.size() > 2 && (label[0] == 'B' || label[0] == 'I') &&
      label[1] == '-') {
    return BioLabel{label[0], std::string(label.substr(2))};
  }
  throw DataError("unknown label '" + std::string(label) + "'");
}

namespace {

// Position of the first BIO violation, or -1.
long FirstBioViolation(const std::vector<std::string>& labels) {
  BioLabel prev;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    BioLabel cur = ParseBioLabel(labels[i]);
    if (cur.prefix == 'I' && (prev.prefix == 'O' || prev.type != cur.type)) {
      return static_cast<long>(i);
    }
    prev = std::move(cur);
  }
  return -1;
}

}  // namespace

bool IsBioValid(const std::vector<std::string>& labels) {
  try {
    return FirstBioViolation(labels) < 0;
  } catch (const DataError&) {
    return false;
  }
}

void ValidateBio(const std::vector<std::string>& labels) {
  const long bad = FirstBioViolation(labels);
  if (bad >= 0) {
    const std::string prev = bad == 0 ? "sentence start" : labels[bad - 1];
    throw DataError("label " + labels[bad] + " at position " +
                    std::to_string(bad) + " follows " + prev);
  }
}

LabelSet::LabelSet(std::vector<std::string> tags) {
  std::sort(tags.begin(), tags.end());
  tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
  tags_ = std::move(tags);
  labels_.push_back(std::string(kOutsideLabel));
  for (const auto& t : tags_) {
    labels_.push_back("B-" + t);
    labels_.push_back("I-" + t);
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    index_.emplace(labels_[i], static_cast<int>(i));
  }
}

LabelSet LabelSet::FromDataset(const Dataset& dataset) {
  std::set<std::string> tags;
  for (const auto& s : dataset) {
    for (const auto& l : s.labels) {
      BioLabel b = ParseBioLabel(l);
      if (b.prefix != 'O') tags.insert(b.type);
    }
  }
  return LabelSet(std::vector<std::string>(tags.begin(), tags.end()));
}

int LabelSet::Index(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) {
    throw DataError("label '" + std::string(label) + "' not in label set");
  }
  return it->second;
}

std::vector<int> LabelSet::Encode(const std::vector<std::string>& labels) const {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(Index(l));
  return out;
}

std::vector<std::string> LabelSet::Decode(const std::vector<int>& indices) const {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(Label(i));
  return out;
}

bool LabelSet::Allowed(int from, int to) const {
  if (!IsInside(to)) return true;
  if (from < 0 || IsOutside(from)) return false;
  return TypeOf(from) == TypeOf(to);
}

Dataset ParseConll(std::string_view text) {
  Dataset out;
  LabeledSentence current;
  auto flush = [&](std::size_t line_no) {
    if (current.tokens.empty()) return;
    try {
      ValidateBio(current.labels);
    } catch (const DataError& e) {
      throw DataError("sentence ending at line " + std::to_string(line_no) +
                      ": " + e.what());
    }
    current.id = std::to_string(out.size());
    out.push_back(std::move(current));
    current = LabeledSentence{};
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      flush(line_no);
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected token<TAB>label");
    }
    std::string_view token = line.substr(0, tab);
    std::string_view label = line.substr(tab + 1);
    if (token == "-DOCSTART-") continue;
    try {
      ParseBioLabel(label);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    current.tokens.emplace_back(token);
    current.labels.emplace_back(label);
  }
  flush(line_no);
  return out;
}

std::string WriteConll(const Dataset& dataset) {
  std::string out;
  for (const auto& s : dataset) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i];
      out += '\t';
      out += s.labels[i];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

Dataset ReadConllFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return ParseConll(ss.str());
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void WriteConllFile(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << WriteConll(dataset);
}

namespace {

using Counts = std::unordered_map<std::string, long>;

std::vector<std::pair<std::string, long>> SortByFreq(const Counts& counts) {
  std::vector<std::pair<std::string, long>> v(counts.begin(), counts.end());
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return v;
}

}  // namespace

Vocabulary Vocabulary::Build(const Dataset& dataset, int min_freq) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(dataset.size());
  for (const auto& s : dataset) sentences.push_back(s.tokens);
  return Build(sentences, min_freq);
}

Vocabulary Vocabulary::Build(
    const std::vector<std::vector<std::string>>& sentences, int min_freq) {
  if (min_freq < 1) throw ConfigError("min_freq must be >= 1");
  Counts word_counts;
  Counts char_counts;
  std::size_t total = 0;
  for (const auto& tokens : sentences) {
    for (const auto& w : tokens) {
      if (w.empty() || w == kSeparatorToken) continue;
      ++word_counts[w];
      for (auto& c : utf8::SplitChars(w)) ++char_counts[c];
      ++total;
    }
  }
  if (total == 0) throw DataError("cannot build a vocabulary from no tokens");

  Vocabulary v;
  v.min_freq_ = min_freq;
  int next = 2;
  for (const auto& [w, n] : SortByFreq(word_counts)) {
    if (n >= min_freq) v.words_.emplace(w, next++);
  }
  for (const auto& [c, n] : SortByFreq(char_counts)) {
    v.chars_.emplace(c, next++);
  }
  return v;
}

std::optional<int> Vocabulary::WordId(std::string_view word) const {
  auto it = words_.find(word);
  if (it == words_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Vocabulary::CharId(std::string_view ch) const {
  auto it = chars_.find(ch);
  if (it == chars_.end()) return std::nullopt;
  return it->second;
}

SubtokenSpan Vocabulary::Tokenize(std::string_view word,
                                  std::size_t word_index) const {
  SubtokenSpan span;
  span.word_index = word_index;
  if (word == kSeparatorToken) {
    span.subtoken_ids.push_back(kSepId);
    return span;
  }
  if (auto id = WordId(word)) {
    span.subtoken_ids.push_back(*id);
    return span;
  }
  for (const auto& c : utf8::SplitChars(word)) {
    span.subtoken_ids.push_back(CharId(c).value_or(kUnkId));
  }
  if (span.subtoken_ids.empty()) span.subtoken_ids.push_back(kUnkId);
  return span;
}

std::vector<SubtokenSpan> Vocabulary::TokenizeSentence(
    const std::vector<std::string>& words) const {
  std::vector<SubtokenSpan> out;
  out.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    out.push_back(Tokenize(words[i], i));
  }
  return out;
}

std::string Vocabulary::Serialize() const {
  auto by_id = [](const auto& m) {
    std::vector<std::pair<int, std::string>> v;
    for (const auto& [s, id] : m) v.emplace_back(id, s);
    std::sort(v.begin(), v.end());
    return v;
  };
  std::ostringstream out;
  out << "#robner-vocab v1 min_freq=" << min_freq_ << " unk=" << kUnkId
      << " sep=" << kSepId << "\n";
  for (const auto& [id, w] : by_id(words_)) out << w << '\t' << id << '\n';
  out << "#chars\n";
  for (const auto& [id, c] : by_id(chars_)) out << c << '\t' << id << '\n';
  return out.str();
}

Vocabulary Vocabulary::Deserialize(std::string_view text) {
  Vocabulary v;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("#robner-vocab v1", 0) != 0) {
    throw DataError("vocabulary: missing '#robner-vocab v1' header");
  }
  const auto mf = line.find("min_freq=");
  if (mf != std::string::npos) v.min_freq_ = std::stoi(line.substr(mf + 9));

  bool in_chars = false;
  std::set<int> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "#chars") {
      in_chars = true;
      continue;
    }
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError("vocabulary line " + std::to_string(line_no) +
                      ": expected entry<TAB>id");
    }
    int id = 0;
    try {
      id = std::stoi(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw DataError("vocabulary line " + std::to_string(line_no) +
                      ": bad id");
    }
    if (id < 2 || !seen.insert(id).second) {
      throw DataError("vocabulary line " + std::to_string(line_no) +
                      ": reserved or duplicate id " + std::to_string(id));
    }
    (in_chars ? v.chars_ : v.words_).emplace(line.substr(0, tab), id);
  }
  if (!seen.empty() && *seen.rbegin() != static_cast<int>(seen.size()) + 1) {
    throw DataError("vocabulary ids are not dense");
  }
  return v;
}

}  // namespace robner
