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

#include "robner/synthetic.h"

#include "robner/rng.h"
#include "robner/utf8.h"

namespace robner {

namespace {

// "{*}" takes any entity type; "{PER}" etc. a fixed one.
const std::vector<std::string>& Templates() {
  static const std::vector<std::string> t = {
      "{*} was mentioned in the morning report .",
      "reporters asked {PER} about {ORG} on monday .",
      "{PER} moved to {LOC} last year .",
      "the office of {ORG} is located in {LOC} .",
      "we met {*} and {*} after the meeting .",
      "{*} announced new plans yesterday .",
      "a statement from {*} surprised many people .",
      "according to {PER} , {ORG} will expand soon .",
      "visitors often travel from {LOC} to {LOC} .",
      "the team thanked {*} for the support .",
      "nobody expected {*} to win this time .",
      "{ORG} hired {PER} as an advisor .",
      "there was a long debate about {*} .",
      "everyone was talking about {*} and {*} .",
      "the new book describes {*} in detail .",
      "people in {LOC} still remember {PER} .",
  };
  return t;
}

struct Filled {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
};

Filled Fill(const std::string& tmpl, Rng& rng) {
  const auto& ents = SyntheticEntities();
  Filled f;
  for (const auto& word : utf8::SplitWhitespace(tmpl)) {
    if (word.size() < 3 || word.front() != '{' || word.back() != '}') {
      f.tokens.push_back(word);
      f.labels.emplace_back(kOutsideLabel);
      continue;
    }
    const std::string type = word.substr(1, word.size() - 2);
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < ents.size(); ++i) {
      if (type == "*" || ents[i].type == type) pool.push_back(i);
    }
    const EntityForm& e = ents[pool[rng.Index(pool.size())]];
    const auto parts = utf8::SplitWhitespace(e.surface);
    for (std::size_t k = 0; k < parts.size(); ++k) {
      f.tokens.push_back(parts[k]);
      f.labels.push_back((k == 0 ? "B-" : "I-") + e.type);
    }
  }
  return f;
}

}  // namespace

const std::vector<EntityForm>& SyntheticEntities() {
  static const std::vector<EntityForm> e = {
      {"PER", "Alina Moreau"},    {"PER", "Tomas Berglund"},
      {"PER", "Keiko Tanabe"},    {"PER", "Rafael Quintero"},
      {"PER", "Ingrid Solheim"},  {"PER", "Marek Novak"},
      {"PER", "Priya Raman"},     {"PER", "Jonas Weller"},
      {"PER", "Lucia Ferrante"},  {"PER", "Oskar Lind"},
      {"PER", "Hana Kovacs"},     {"PER", "Dmitri Orlov"},
      {"PER", "Amara Okafor"},    {"PER", "Felix Brandt"},
      {"PER", "Sofia Almeida"},   {"PER", "Yusuf Demir"},
      {"PER", "Elena Petrova"},
      {"LOC", "Varenna"},         {"LOC", "Oslund"},
      {"LOC", "Port Maren"},      {"LOC", "Kaltenbach"},
      {"LOC", "Sierra Alta"},     {"LOC", "Lake Tamsin"},
      {"LOC", "Brevik"},          {"LOC", "Nordhaven"},
      {"LOC", "Castel Rocca"},    {"LOC", "Mirabel"},
      {"LOC", "Eastbridge"},      {"LOC", "Valdora"},
      {"LOC", "Kirkwall"},        {"LOC", "San Telmo"},
      {"LOC", "Ravensholm"},      {"LOC", "Dunmore"},
      {"LOC", "Altamira"},
      {"ORG", "Kestrel Labs"},    {"ORG", "Northwind Bank"},
      {"ORG", "Helix Motors"},    {"ORG", "Orion Media"},
      {"ORG", "Bluefield Group"}, {"ORG", "Vantage Systems"},
      {"ORG", "Meridian Press"},  {"ORG", "Atlas Foundation"},
      {"ORG", "Sable Energy"},    {"ORG", "Pinecrest College"},
      {"ORG", "Quantis"},         {"ORG", "Lumen Health"},
      {"ORG", "Ironclad Union"},  {"ORG", "Copperline"},
      {"ORG", "Westgate Council"}, {"ORG", "Tidewater Trust"},
  };
  return e;
}

Dataset GenerateNerCorpus(std::size_t sentences, std::uint64_t seed) {
  Rng rng(seed);
  const auto& templates = Templates();
  Dataset out;
  out.reserve(sentences);
  for (std::size_t s = 0; s < sentences; ++s) {
    Filled f = Fill(templates[rng.Index(templates.size())], rng);
    out.push_back({"s" + std::to_string(s), std::move(f.tokens), std::move(f.labels)});
  }
  return out;
}

std::vector<IndexedUnit> GenerateKnowledge(std::uint64_t seed) {
  static const std::vector<std::string> kPer = {
      "{E} is a writer who grew up in {LOC} .",
      "{E} worked for {ORG} for many years .",
  };
  static const std::vector<std::string> kLoc = {
      "{E} is a small town not far from {LOC} .",
      "{E} is home to the offices of {ORG} .",
  };
  static const std::vector<std::string> kOrg = {
      "{E} is a company founded in {LOC} .",
      "{E} was led for a decade by {PER} .",
  };
  const auto& ents = SyntheticEntities();
  Rng rng(seed);
  std::vector<IndexedUnit> units;
  for (const EntityForm& e : ents) {
    const auto& tmpls = e.type == "PER" ? kPer : e.type == "LOC" ? kLoc : kOrg;
    std::vector<std::string> sentences;
    std::vector<std::vector<Anchor>> anchors;
    for (const std::string& t : tmpls) {
      std::string sent;
      std::vector<Anchor> an;
      for (const auto& word : utf8::SplitWhitespace(t)) {
        if (!sent.empty()) sent += ' ';
        if (word == "{E}") {
          sent += e.surface;
        } else if (word.front() == '{') {
          const std::string type = word.substr(1, word.size() - 2);
          std::vector<std::size_t> pool;
          for (std::size_t i = 0; i < ents.size(); ++i) {
            if (ents[i].type == type && ents[i].surface != e.surface) pool.push_back(i);
          }
          const EntityForm& other = ents[pool[rng.Index(pool.size())]];
          std::string target = other.surface;
          for (char& c : target) {
            if (c == ' ') c = '_';
          }
          an.push_back({other.surface, target, sent.size(), sent.size() + other.surface.size()});
          sent += other.surface;
        } else {
          sent += word;
        }
      }
      sentences.push_back(sent);
      anchors.push_back(an);
    }
    const std::string para = utf8::Join(sentences, " ");
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      IndexedUnit u;
      u.sent_id = "k" + std::to_string(units.size());
      u.sentence = sentences[k];
      u.paragraph = para;
      u.title = e.surface;
      u.anchors = anchors[k];
      units.push_back(std::move(u));
    }
  }
  return units;
}

}  // namespace robner
