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

#include <gtest/gtest.h>

#include "robner/error.h"
#include "robner/utf8.h"
#include "test_util.h"

namespace robner {
namespace {

TEST(Utf8, DecodeEncodeRoundTrip) {
  const std::string s = "cØt naïve 東京";
  EXPECT_EQ(utf8::Encode(utf8::Decode(s)), s);
  EXPECT_EQ(utf8::SplitChars("cØt"), (std::vector<std::string>{"c", "Ø", "t"}));
  EXPECT_EQ(utf8::SplitWhitespace("  a\tb  c "),
            (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Conll, ParsesSingleToken) {
  const Dataset d = ParseConll("Paris\tB-LOC\n\n");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].tokens, std::vector<std::string>{"Paris"});
  EXPECT_EQ(d[0].labels, std::vector<std::string>{"B-LOC"});
}

TEST(Conll, RejectsInsideAfterOutside) {
  EXPECT_THROW(ParseConll("a\tO\nb\tI-LOC\n\n"), DataError);
}

TEST(Conll, RejectsInsideAfterOtherType) {
  EXPECT_THROW(ParseConll("a\tB-PER\nb\tI-LOC\n\n"), DataError);
}

TEST(Conll, RejectsMalformedLines) {
  EXPECT_THROW(ParseConll("a b\tO\tX\n\n"), DataError);
  EXPECT_THROW(ParseConll("lonely\n\n"), DataError);
  EXPECT_THROW(ParseConll("a\tX-LOC\n\n"), DataError);
}

TEST(Conll, WriteShapes) {
  EXPECT_EQ(WriteConll({}), "");
  const Dataset d = {{"0", {"a", "b"}, {"B-PER", "I-PER"}}};
  EXPECT_EQ(WriteConll(d), "a\tB-PER\nb\tI-PER\n\n");
}

TEST(Conll, RoundTripText) {
  const std::string t = "New\tB-LOC\nYork\tI-LOC\nis\tO\n\nok\tO\n\n";
  EXPECT_EQ(WriteConll(ParseConll(t)), t);
}

TEST(Conll, RoundTripRandomDatasets) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Dataset d = testing::RandomDataset(rng, 1 + rng.Index(6));
    EXPECT_EQ(ParseConll(WriteConll(d)), d);
  }
}

TEST(LabelSet, BijectionAndLayout) {
  const LabelSet ls({"PER", "LOC", "PER"});
  EXPECT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls.tags(), (std::vector<std::string>{"LOC", "PER"}));
  for (int i = 0; i < static_cast<int>(ls.size()); ++i) {
    EXPECT_EQ(ls.Index(ls.Label(i)), i);
  }
  EXPECT_EQ(ls.Label(0), "O");
  EXPECT_TRUE(ls.Allowed(ls.Index("B-LOC"), ls.Index("I-LOC")));
  EXPECT_FALSE(ls.Allowed(ls.Index("O"), ls.Index("I-LOC")));
  EXPECT_FALSE(ls.Allowed(-1, ls.Index("I-PER")));
  EXPECT_FALSE(ls.Allowed(ls.Index("I-PER"), ls.Index("I-LOC")));
}

TEST(Vocabulary, FrequencyThreshold) {
  Dataset d;
  for (int i = 0; i < 3; ++i) d.push_back({"", {"cat"}, {"O"}});
  d.push_back({"", {"dog"}, {"O"}});
  const Vocabulary v = Vocabulary::Build(d, 2);
  EXPECT_TRUE(v.WordId("cat").has_value());
  EXPECT_FALSE(v.WordId("dog").has_value());
  for (const char* c : {"c", "a", "t", "d", "o", "g"}) {
    EXPECT_TRUE(v.CharId(c).has_value()) << c;
  }
  EXPECT_EQ(v.char_count(), 6u);
  const Vocabulary all = Vocabulary::Build(d, 1);
  EXPECT_TRUE(all.WordId("dog").has_value());
}

TEST(Vocabulary, DeterministicOrdering) {
  Rng rng(3);
  const Dataset d = testing::RandomDataset(rng, 50);
  EXPECT_EQ(Vocabulary::Build(d, 1), Vocabulary::Build(d, 1));
  // Higher frequency gets the smaller id; ties are lexicographic.
  const Dataset f = {{"", {"b", "a", "b", "c", "a", "b"}, std::vector<std::string>(6, "O")}};
  const Vocabulary v = Vocabulary::Build(f, 1);
  EXPECT_LT(*v.WordId("b"), *v.WordId("a"));
  EXPECT_LT(*v.WordId("a"), *v.WordId("c"));
}

TEST(Vocabulary, RejectsEmptyCorpus) {
  EXPECT_THROW(Vocabulary::Build(Dataset{}, 1), DataError);
}

TEST(Vocabulary, TokenizeFallsBackToCharacters) {
  const Dataset d = {{"", {"cat", "cat", "t"}, {"O", "O", "O"}}};
  const Vocabulary v = Vocabulary::Build(d, 2);
  EXPECT_EQ(v.Tokenize("cat").subtoken_ids, std::vector<int>{*v.WordId("cat")});
  EXPECT_EQ(v.Tokenize("cta").subtoken_ids,
            (std::vector<int>{*v.CharId("c"), *v.CharId("t"), *v.CharId("a")}));
  EXPECT_EQ(v.Tokenize("cØt").subtoken_ids,
            (std::vector<int>{*v.CharId("c"), v.unk_id(), *v.CharId("t")}));
  EXPECT_EQ(v.Tokenize(kSeparatorToken).subtoken_ids, std::vector<int>{v.sep_id()});
}

TEST(Vocabulary, SpansPartitionSubtokens) {
  Rng rng(11);
  const Dataset d = testing::RandomDataset(rng, 30);
  const Vocabulary v = Vocabulary::Build(d, 2);
  for (const auto& s : testing::RandomDataset(rng, 50)) {
    const auto spans = v.TokenizeSentence(s.tokens);
    ASSERT_EQ(spans.size(), s.tokens.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      EXPECT_EQ(spans[i].word_index, i);
      EXPECT_FALSE(spans[i].subtoken_ids.empty());
      total += spans[i].subtoken_ids.size();
      EXPECT_EQ(spans[i].subtoken_ids, v.Tokenize(s.tokens[i]).subtoken_ids);
    }
    EXPECT_GE(total, s.tokens.size());
  }
}

TEST(Vocabulary, SerializeRoundTrip) {
  Rng rng(5);
  const Vocabulary v = Vocabulary::Build(testing::RandomDataset(rng, 40), 2);
  const std::string text = v.Serialize();
  EXPECT_EQ(Vocabulary::Deserialize(text), v);
  EXPECT_EQ(Vocabulary::Deserialize(text).Serialize(), text);
  EXPECT_THROW(Vocabulary::Deserialize("garbage\n"), DataError);
}

}  // namespace
}  // namespace robner
