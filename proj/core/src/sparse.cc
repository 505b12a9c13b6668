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

#include "robner/sparse.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "robner/error.h"
#include "robner/utf8.h"

namespace robner {

using nlohmann::json;

namespace {

json UnitToJson(const IndexedUnit& u) {
  json anchors = json::array();
  for (const auto& a : u.anchors) {
    anchors.push_back({{"surface", a.surface},
                       {"target", a.target},
                       {"start", a.start},
                       {"end", a.end}});
  }
  return {{"id", u.sent_id},
          {"sent", u.sentence},
          {"para", u.paragraph},
          {"title", u.title},
          {"anchors", anchors}};
}

}  // namespace

void IndexedUnit::Validate() const {
  std::size_t prev_end = 0;
  for (const Anchor& a : anchors) {
    if (a.start >= a.end || a.end > sentence.size()) {
      throw DataError("unit " + sent_id + ": anchor span out of range");
    }
    if (a.start < prev_end) {
      throw DataError("unit " + sent_id + ": anchors overlap or are unsorted");
    }
    if (sentence.compare(a.start, a.end - a.start, a.surface) != 0) {
      throw DataError("unit " + sent_id + ": anchor span does not spell '" +
                      a.surface + "'");
    }
    prev_end = a.end;
  }
  if (paragraph.find(sentence) == std::string::npos) {
    throw DataError("unit " + sent_id + ": sentence is not in its paragraph");
  }
}

std::vector<IndexedUnit> ParseUnitsJsonl(std::string_view text) {
  std::vector<IndexedUnit> units;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (utf8::SplitWhitespace(line).empty()) continue;
    const std::string where = "knowledge line " + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      IndexedUnit u;
      u.sentence = j.at("sent").get<std::string>();
      u.paragraph = j.value("para", u.sentence);
      u.title = j.value("title", std::string());
      u.sent_id = j.contains("id") ? (j["id"].is_string()
                                          ? j["id"].get<std::string>()
                                          : j["id"].dump())
                                   : std::to_string(units.size());
      for (const auto& a : j.value("anchors", json::array())) {
        u.anchors.push_back({a.at("surface").get<std::string>(),
                             a.at("target").get<std::string>(),
                             a.at("start").get<std::size_t>(),
                             a.at("end").get<std::size_t>()});
      }
      std::sort(u.anchors.begin(), u.anchors.end(),
                [](const Anchor& x, const Anchor& y) { return x.start < y.start; });
      u.Validate();
      units.push_back(std::move(u));
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return units;
}

std::string WriteUnitsJsonl(const std::vector<IndexedUnit>& units) {
  std::string out;
  for (const auto& u : units) out += UnitToJson(u).dump() + "\n";
  return out;
}

namespace {

char32_t Lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  // Latin-1 capitals except the multiplication sign.
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  return c;
}

bool IsTermChar(char32_t c) {
  if (c < 128) {
    return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') ||
           (c >= U'0' && c <= U'9');
  }
  return !utf8::IsSpace(c);
}

}  // namespace

std::vector<std::string> AnalyzeText(std::string_view text) {
  std::vector<std::string> terms;
  std::u32string cur;
  for (char32_t c : utf8::Decode(text)) {
    if (IsTermChar(c)) {
      cur.push_back(Lower(c));
    } else if (!cur.empty()) {
      terms.push_back(utf8::Encode(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) terms.push_back(utf8::Encode(cur));
  return terms;
}

InvertedIndex InvertedIndex::Build(const std::vector<IndexedUnit>& units,
                                   double k1, double b) {
  if (units.empty()) throw DataError("cannot index an empty unit list");
  if (!(k1 >= 0.0) || !(b >= 0.0 && b <= 1.0)) {
    throw ConfigError("BM25 needs k1 >= 0 and b in [0, 1]");
  }
  InvertedIndex idx;
  idx.units_ = units;
  idx.k1_ = k1;
  idx.b_ = b;
  double total = 0.0;
  for (std::size_t u = 0; u < units.size(); ++u) {
    const auto terms = AnalyzeText(units[u].sentence);
    idx.doc_len_.push_back(static_cast<std::uint32_t>(terms.size()));
    total += terms.size();
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : terms) ++tf[t];
    for (const auto& [t, n] : tf) idx.postings_[t].push_back({u, n});
  }
  idx.avgdl_ = total / units.size();
  return idx;
}

double InvertedIndex::Idf(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  const double df = it == postings_.end() ? 0.0 : it->second.size();
  const double n = static_cast<double>(units_.size());
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<RetrievalHit> InvertedIndex::Search(std::string_view query,
                                                std::size_t k) const {
  const auto terms = AnalyzeText(query);
  const std::set<std::string> unique(terms.begin(), terms.end());
  std::unordered_map<std::uint64_t, double> acc;
  for (const auto& t : unique) {
    auto it = postings_.find(t);
    if (it == postings_.end()) continue;
    const double idf = Idf(t);
    for (const Posting& p : it->second) {
      const double tf = p.tf;
      const double norm =
          avgdl_ > 0.0 ? 1.0 - b_ + b_ * doc_len_[p.unit] / avgdl_ : 1.0;
      acc[p.unit] += idf * tf * (k1_ + 1.0) / (tf + k1_ * norm);
    }
  }
  std::vector<RetrievalHit> hits;
  hits.reserve(acc.size());
  for (const auto& [u, s] : acc) hits.push_back({u, s});
  auto better = [](const RetrievalHit& x, const RetrievalHit& y) {
    return x.score != y.score ? x.score > y.score : x.unit < y.unit;
  };
  if (hits.size() > k) {
    std::partial_sort(hits.begin(), hits.begin() + k, hits.end(), better);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), better);
  }
  return hits;
}

std::string InvertedIndex::Serialize() const {
  json j;
  j["format"] = "robner-bm25";
  j["version"] = 1;
  j["k1"] = k1_;
  j["b"] = b_;
  j["avgdl"] = avgdl_;
  j["doc_len"] = doc_len_;
  json postings = json::object();
  for (const auto& [t, ps] : postings_) {
    json list = json::array();
    for (const auto& p : ps) list.push_back({p.unit, p.tf});
    postings[t] = list;
  }
  j["postings"] = postings;
  json units = json::array();
  for (const auto& u : units_) units.push_back(UnitToJson(u));
  j["units"] = units;
  return j.dump() + "\n";
}

InvertedIndex InvertedIndex::Deserialize(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "robner-bm25" || j.at("version") != 1) {
      throw DataError("not a version-1 BM25 index");
    }
    InvertedIndex idx;
    idx.k1_ = j.at("k1").get<double>();
    idx.b_ = j.at("b").get<double>();
    idx.avgdl_ = j.at("avgdl").get<double>();
    idx.doc_len_ = j.at("doc_len").get<std::vector<std::uint32_t>>();
    std::string jsonl;
    for (const auto& u : j.at("units")) jsonl += u.dump() + "\n";
    idx.units_ = ParseUnitsJsonl(jsonl);
    if (idx.units_.size() != idx.doc_len_.size()) {
      throw DataError("index unit count differs from length table");
    }
    for (const auto& [t, list] : j.at("postings").items()) {
      auto& ps = idx.postings_[t];
      for (const auto& p : list) {
        ps.push_back({p.at(0).get<std::uint64_t>(), p.at(1).get<std::uint32_t>()});
        if (ps.back().unit >= idx.units_.size()) {
          throw DataError("posting refers to a missing unit");
        }
      }
    }
    return idx;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad index file: ") + e.what());
  }
}

ContextMode ParseContextMode(std::string_view name) {
  if (name == "para") return ContextMode::kPara;
  if (name == "sent") return ContextMode::kSent;
  if (name == "sent-link") return ContextMode::kSentLink;
  throw ConfigError("unknown context mode '" + std::string(name) +
                    "' (expected para, sent or sent-link)");
}

std::string_view ContextModeName(ContextMode mode) {
  switch (mode) {
    case ContextMode::kPara: return "para";
    case ContextMode::kSent: return "sent";
    case ContextMode::kSentLink: return "sent-link";
  }
  return "sent";
}

std::string RenderContext(const IndexedUnit& unit, ContextMode mode) {
  std::string body;
  switch (mode) {
    case ContextMode::kPara:
      body = unit.paragraph;
      break;
    case ContextMode::kSent:
      body = unit.sentence;
      break;
    case ContextMode::kSentLink: {
      std::size_t pos = 0;
      for (const Anchor& a : unit.anchors) {
        body.append(unit.sentence, pos, a.start - pos);
        body += "<e:" + a.target + ">" + a.surface + "</e>";
        pos = a.end;
      }
      body.append(unit.sentence, pos, std::string::npos);
      break;
    }
  }
  return unit.title.empty() ? body : unit.title + " : " + body;
}

std::vector<std::string> RenderContexts(const std::vector<RetrievalHit>& hits,
                                        const std::vector<IndexedUnit>& units,
                                        ContextMode mode, std::size_t top_m) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < hits.size() && i < top_m; ++i) {
    if (hits[i].unit >= units.size()) {
      throw DataError("hit refers to a missing unit");
    }
    out.push_back(RenderContext(units[hits[i].unit], mode));
  }
  return out;
}

}  // namespace robner
