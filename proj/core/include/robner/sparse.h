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

#ifndef ROBNER_SPARSE_H_
#define ROBNER_SPARSE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace robner {

// A hyperlink inside a unit's sentence; [start, end) are byte offsets.
struct Anchor {
  std::string surface;
  std::string target;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Anchor&) const = default;
};

// The smallest searchable unit: one sentence of the knowledge corpus.
struct IndexedUnit {
  std::string sent_id;
  std::string sentence;
  std::string paragraph;
  std::string title;
  std::vector<Anchor> anchors;  // sorted, non-overlapping

  // Throws DataError when an anchor span leaves the sentence, does not spell
  // its surface, overlaps another, or the sentence is not in the paragraph.
  void Validate() const;
  bool operator==(const IndexedUnit&) const = default;
};

// One JSON object per line with "sent" and optional "para", "title", "id"
// and "anchors" ([{"surface","target","start","end"}]). A missing "para"
// defaults to the sentence; a missing "id" to the line ordinal.
std::vector<IndexedUnit> ParseUnitsJsonl(std::string_view text);
std::string WriteUnitsJsonl(const std::vector<IndexedUnit>& units);

// Lowercased runs of letters and digits; ASCII punctuation and whitespace
// separate terms. Non-ASCII code points count as letters.
std::vector<std::string> AnalyzeText(std::string_view text);

struct Posting {
  std::uint64_t unit = 0;
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

struct RetrievalHit {
  std::uint64_t unit = 0;
  double score = 0.0;
};

class InvertedIndex {
 public:
  static InvertedIndex Build(const std::vector<IndexedUnit>& units,
                             double k1 = 1.2, double b = 0.75);

  // Top-k units sharing at least one query term, by BM25 score desc then
  // unit id asc. Duplicate query terms count once.
  std::vector<RetrievalHit> Search(std::string_view query, std::size_t k) const;
  double Idf(std::string_view term) const;

  const std::map<std::string, std::vector<Posting>>& postings() const {
    return postings_;
  }
  const std::vector<std::uint32_t>& doc_len() const { return doc_len_; }
  const std::vector<IndexedUnit>& units() const { return units_; }
  double avgdl() const { return avgdl_; }
  std::size_t size() const { return units_.size(); }
  double k1() const { return k1_; }
  double b() const { return b_; }

  // JSON document holding parameters, units, lengths and postings.
  std::string Serialize() const;
  static InvertedIndex Deserialize(std::string_view text);

  bool operator==(const InvertedIndex&) const = default;

 private:
  std::vector<IndexedUnit> units_;
  std::map<std::string, std::vector<Posting>> postings_;
  std::vector<std::uint32_t> doc_len_;
  double avgdl_ = 0.0;
  double k1_ = 1.2;
  double b_ = 0.75;
};

enum class ContextMode { kPara, kSent, kSentLink };

ContextMode ParseContextMode(std::string_view name);
std::string_view ContextModeName(ContextMode mode);

// "title : text" (or just text for an empty title). para uses the paragraph,
// sent the plain sentence, sent-link the sentence with anchors rewritten as
// <e:target>surface</e>.
std::string RenderContext(const IndexedUnit& unit, ContextMode mode);

// Renders the first top_m hits.
std::vector<std::string> RenderContexts(const std::vector<RetrievalHit>& hits,
                                        const std::vector<IndexedUnit>& units,
                                        ContextMode mode, std::size_t top_m = 10);

}  // namespace robner

#endif  // ROBNER_SPARSE_H_
