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

#include "robner/align.h"

#include <algorithm>
#include <cstdint>
#include <set>

#include "robner/error.h"
#include "robner/utf8.h"

namespace robner {

std::size_t EditDistance(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t EditDistance(std::string_view a, std::string_view b) {
  return EditDistance(utf8::Decode(a), utf8::Decode(b));
}

namespace {

// Token ordinal of each code point, -1 for whitespace.
std::vector<long> TokenOfChar(std::u32string_view text, std::size_t* count) {
  std::vector<long> out(text.size(), -1);
  long token = -1;
  bool in_token = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (utf8::IsSpace(text[i])) {
      in_token = false;
      continue;
    }
    if (!in_token) {
      ++token;
      in_token = true;
    }
    out[i] = token;
  }
  *count = static_cast<std::size_t>(token + 1);
  return out;
}

}  // namespace

EditAlignment LevenshteinAlign(std::string_view gold_text,
                               std::string_view noisy_text) {
  const std::u32string g = utf8::Decode(gold_text);
  const std::u32string s = utf8::Decode(noisy_text);
  const std::size_t n = g.size();
  const std::size_t m = s.size();
  const std::size_t w = m + 1;
  std::vector<std::uint32_t> d((n + 1) * w);
  for (std::size_t j = 0; j <= m; ++j) d[j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    d[i * w] = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t sub =
          d[(i - 1) * w + j - 1] + (g[i - 1] == s[j - 1] ? 0 : 1);
      d[i * w + j] =
          std::min({sub, d[(i - 1) * w + j] + 1, d[i * w + j - 1] + 1});
    }
  }

  EditAlignment out;
  out.cost = d[n * w + m];
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t here = d[i * w + j];
    if (i > 0 && j > 0 && g[i - 1] == s[j - 1] &&
        d[(i - 1) * w + j - 1] == here) {
      out.ops.push_back({EditOp::kMatch, long(i - 1), long(j - 1), s[j - 1]});
      --i;
      --j;
    } else if (i > 0 && j > 0 && d[(i - 1) * w + j - 1] + 1 == here) {
      out.ops.push_back({EditOp::kSub, long(i - 1), long(j - 1), s[j - 1]});
      --i;
      --j;
    } else if (i > 0 && d[(i - 1) * w + j] + 1 == here) {
      out.ops.push_back({EditOp::kDel, long(i - 1), -1, 0});
      --i;
    } else {
      out.ops.push_back({EditOp::kIns, -1, long(j - 1), s[j - 1]});
      --j;
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());

  std::size_t noisy_tokens = 0;
  const std::vector<long> gold_tok = TokenOfChar(g, &out.gold_token_count);
  const std::vector<long> noisy_tok = TokenOfChar(s, &noisy_tokens);
  std::vector<std::set<std::size_t>> sets(noisy_tokens);
  for (const AlignedEdit& e : out.ops) {
    if (e.op != EditOp::kMatch && e.op != EditOp::kSub) continue;
    const long nt = noisy_tok[e.noisy_pos];
    const long gt = gold_tok[e.gold_pos];
    if (nt >= 0 && gt >= 0) sets[nt].insert(static_cast<std::size_t>(gt));
  }
  out.token_map.reserve(noisy_tokens);
  for (const auto& st : sets) out.token_map.emplace_back(st.begin(), st.end());
  return out;
}

EditAlignment AlignTokens(const std::vector<std::string>& gold_tokens,
                          const std::vector<std::string>& noisy_tokens) {
  return LevenshteinAlign(SentenceText(gold_tokens),
                          SentenceText(noisy_tokens));
}

std::string ReplayEdits(std::string_view gold_text,
                        const EditAlignment& alignment) {
  const std::u32string g = utf8::Decode(gold_text);
  std::u32string out;
  for (const AlignedEdit& e : alignment.ops) {
    switch (e.op) {
      case EditOp::kMatch:
        out.push_back(g.at(e.gold_pos));
        break;
      case EditOp::kSub:
      case EditOp::kIns:
        out.push_back(e.ch);
        break;
      case EditOp::kDel:
        break;
    }
  }
  return utf8::Encode(out);
}

std::vector<std::string> RepairBio(std::vector<std::string> labels) {
  BioLabel prev;
  for (auto& l : labels) {
    BioLabel cur = ParseBioLabel(l);
    if (cur.prefix == 'I' && (prev.prefix == 'O' || prev.type != cur.type)) {
      cur.prefix = 'B';
      l = "B-" + cur.type;
    }
    prev = std::move(cur);
  }
  return labels;
}

std::vector<std::string> ProjectLabels(
    const LabeledSentence& gold, const std::vector<std::string>& noisy_tokens,
    const EditAlignment& alignment) {
  if (alignment.gold_token_count != gold.tokens.size() ||
      alignment.token_map.size() != noisy_tokens.size() ||
      gold.labels.size() != gold.tokens.size()) {
    throw DataError("alignment does not match sentence '" + gold.id + "'");
  }
  std::vector<std::string> out;
  out.reserve(noisy_tokens.size());
  std::vector<bool> covered(gold.tokens.size(), false);
  for (const auto& sources : alignment.token_map) {
    if (sources.empty()) {
      out.emplace_back(kOutsideLabel);
      continue;
    }
    const std::size_t first = sources.front();
    if (first >= gold.tokens.size()) {
      throw DataError("alignment references gold token out of range");
    }
    BioLabel label = ParseBioLabel(gold.labels[first]);
    if (label.prefix == 'B' && covered[first]) label.prefix = 'I';
    out.push_back(label.prefix == 'O'
                      ? std::string(kOutsideLabel)
                      : std::string(1, label.prefix) + "-" + label.type);
    for (std::size_t g : sources) covered.at(g) = true;
  }
  return RepairBio(std::move(out));
}

LabeledSentence ProjectSentence(const LabeledSentence& gold,
                                const std::vector<std::string>& noisy_tokens) {
  LabeledSentence out;
  out.id = gold.id;
  out.tokens = noisy_tokens;
  out.labels =
      ProjectLabels(gold, noisy_tokens, AlignTokens(gold.tokens, noisy_tokens));
  return out;
}

}  // namespace robner
