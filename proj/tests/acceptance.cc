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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cli.h"
#include "robner/align.h"
#include "robner/corpus.h"
#include "robner/crf.h"
#include "robner/dense.h"
#include "robner/eval.h"
#include "robner/noise.h"
#include "robner/rng.h"
#include "robner/self_retrieval.h"
#include "robner/sparse.h"
#include "robner/synthetic.h"
#include "robner/trainer.h"
#include "robner/utf8.h"
#include "test_util.h"

namespace robner {
namespace {

namespace fs = std::filesystem;
using testing::RandomBio;
using testing::RandomWord;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Collects the first failed condition and a summary line.
class Tally {
 public:
  void Require(bool ok, const std::string& what) {
    if (!ok && failure_.empty()) failure_ = what;
  }
  void Note(const std::string& s) {
    if (!notes_.empty()) notes_ += "; ";
    notes_ += s;
  }
  bool ok() const { return failure_.empty(); }
  std::string Detail() const { return ok() ? notes_ : failure_ + (notes_.empty() ? "" : " [" + notes_ + "]"); }

 private:
  std::string failure_;
  std::string notes_;
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

// ---------------------------------------------------------------- CRF oracles

CrfScores RandomScores(Rng& rng, int n, int k, const Eigen::MatrixXd* mask) {
  CrfScores s;
  s.emissions.resize(n, k);
  s.transitions.resize(k + 2, k + 2);
  for (Eigen::Index i = 0; i < s.emissions.size(); ++i) s.emissions(i) = 2.0 * rng.Normal();
  for (Eigen::Index i = 0; i < s.transitions.size(); ++i) s.transitions(i) = rng.Normal();
  if (mask != nullptr) s.transitions += *mask;
  return s;
}

double OraclePathScore(const CrfScores& s, const std::vector<int>& p) {
  const int k = s.num_labels();
  double v = s.transitions(k, p[0]) + s.transitions(p.back(), k + 1);
  for (std::size_t i = 0; i < p.size(); ++i) {
    v += s.emissions(static_cast<Eigen::Index>(i), p[i]);
    if (i > 0) v += s.transitions(p[i - 1], p[i]);
  }
  return v;
}

struct Enumeration {
  double log_z = 0.0;
  Eigen::MatrixXd marginals;
  std::vector<int> best;  // first maximum in lexicographic order
  std::vector<std::vector<int>> feasible;
};

Enumeration Enumerate(const CrfScores& s) {
  const int n = s.length();
  const int k = s.num_labels();
  std::vector<std::pair<std::vector<int>, double>> all;
  std::vector<int> path(n, 0);
  while (true) {
    all.emplace_back(path, OraclePathScore(s, path));
    int i = n - 1;
    while (i >= 0 && ++path[i] == k) path[i--] = 0;
    if (i < 0) break;
  }
  Enumeration e;
  double m = -kInf;
  for (const auto& [p, v] : all) {
    if (v > m) {
      m = v;
      e.best = p;
    }
  }
  double z = 0.0;
  for (const auto& [p, v] : all) z += std::exp(v - m);
  e.log_z = m + std::log(z);
  e.marginals = Eigen::MatrixXd::Zero(n, k);
  for (const auto& [p, v] : all) {
    if (v == -kInf) continue;
    e.feasible.push_back(p);
    const double w = std::exp(v - e.log_z);
    for (int i = 0; i < n; ++i) e.marginals(i, p[i]) += w;
  }
  return e;
}

// Random instance; odd label counts get a BIO mask half of the time.
CrfScores RandomInstance(Rng& rng, int trial) {
  const int n = 1 + static_cast<int>(rng.Index(6));
  const int k = 1 + static_cast<int>(rng.Index(5));
  if (k % 2 == 1 && trial % 2 == 0) {
    std::vector<std::string> tags;
    for (int t = 0; t < k / 2; ++t) tags.push_back("T" + std::to_string(t));
    const Eigen::MatrixXd mask = BioTransitionMask(LabelSet(tags));
    return RandomScores(rng, n, k, &mask);
  }
  return RandomScores(rng, n, k, nullptr);
}

void CrfOracle(Tally& t) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const CrfScores s = RandomInstance(rng, trial);
    const Enumeration e = Enumerate(s);
    const std::vector<int>& gold = e.feasible[rng.Index(e.feasible.size())];
    const double nll_oracle = e.log_z - OraclePathScore(s, gold);
    const double d_z = std::abs(LogPartition(s) - e.log_z);
    const double d_q = (Marginals(s) - e.marginals).cwiseAbs().maxCoeff();
    const double d_nll = std::abs(CrfNll(s, gold) - nll_oracle);
    worst = std::max({worst, d_z, d_q, d_nll});
    t.Require(d_z < 1e-8, "log_partition differs on trial " + std::to_string(trial));
    t.Require(d_q < 1e-8, "marginals differ on trial " + std::to_string(trial));
    t.Require(d_nll < 1e-8, "nll differs on trial " + std::to_string(trial));
    t.Require(Viterbi(s) == e.best, "viterbi differs on trial " + std::to_string(trial));
  }
  const double secs = Seconds(start);
  t.Require(secs < 10.0, "runtime " + Fmt("%.1f s", secs) + " >= 10 s");
  t.Note("200 instances, max |delta| " + Fmt("%.2e", worst) + ", " + Fmt("%.2f s", secs));
}

void CrfGradientIdentity(Tally& t) {
  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const CrfScores s = RandomInstance(rng, trial);
    const Enumeration e = Enumerate(s);
    const std::vector<int>& gold = e.feasible[rng.Index(e.feasible.size())];
    Eigen::MatrixXd expected = e.marginals;
    for (int i = 0; i < s.length(); ++i) expected(i, gold[i]) -= 1.0;
    const double d = (CrfNllWithGradient(s, gold).emissions - expected).cwiseAbs().maxCoeff();
    worst = std::max(worst, d);
    t.Require(d < 1e-8, "emission gradient differs on trial " + std::to_string(trial));
  }
  t.Note("200 instances, max |delta| " + Fmt("%.2e", worst));
}

// ----------------------------------------------------- joint-loss gradients

struct JointFixture {
  LabelSet labels{std::vector<std::string>{"LOC", "PER"}};
  Vocabulary vocab;
  std::vector<TrainingExample> examples;
  Tensor mask;
  TrainConfig config;
};

JointFixture MakeJointFixture() {
  JointFixture f;
  const Dataset d = {
      {"a", {"Ann", "visited", "Oslo", "today"}, {"B-PER", "O", "B-LOC", "O"}},
      {"b", {"New", "York", "met", "Bo"}, {"B-LOC", "I-LOC", "O", "B-PER"}},
  };
  f.vocab = Vocabulary::Build(d, 1);
  f.mask = BioTransitionMask(f.labels);
  LabeledSentence noisy = d[1];
  noisy.tokens[1] = "Yrok";
  f.examples.push_back(MakeExample(d[0], {"Ann Oslo", "Bo"}, f.vocab, f.labels, 16));
  f.examples.push_back(MakeExample(noisy, {"New York"}, f.vocab, f.labels, 16));
  EncoderConfig& e = f.config.encoder;
  e.d_model = 32;
  e.n_heads = 2;
  e.n_layers = 2;
  e.d_ff = 32;
  e.max_len = 16;
  e.vocab_size = static_cast<int>(f.vocab.size());
  e.seed = 3;
  f.config.budget = 16;
  f.config.clip_norm = 0.0;
  f.config.mv_weight = 0.7;
  return f;
}

// The joint objective assembled from CRF NLLs and explicit consistency
// terms; retrieval-view targets held constant come from `frozen`.
double OracleJointLoss(const ModelParams& p, const ModelParams& frozen, const TrainingExample& ex,
                       const TrainConfig& c, const Tensor& mask) {
  const auto& gold = ex.ov.labels;
  const ViewForward ov = RunView(p, ex.ov, mask);
  const ViewForward rv = RunView(p, ex.rv, mask);
  const double l_text = CrfNll(ov.scores, gold);
  const double l_ret = CrfNll(rv.scores, gold);
  switch (c.mv_mode) {
    case MvMode::kNone:
      return l_text;
    case MvMode::kFull:
      return l_ret;
    case MvMode::kL2: {
      const Tensor target = c.l2_stop_gradient ? RunView(frozen, ex.rv, mask).word_reps : rv.word_reps;
      return l_text + l_ret + c.mv_weight * (ov.word_reps - target).squaredNorm();
    }
    case MvMode::kKl: {
      const Tensor qt = Marginals(RunView(frozen, ex.rv, mask).scores);
      const Tensor q = Marginals(ov.scores);
      double kl = 0.0;
      for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (qt(i) > 0.0) kl += qt(i) * (std::log(qt(i)) - std::log(q(i)));
      }
      return l_text + l_ret + c.mv_weight * kl;
    }
  }
  return 0.0;
}

void RequireGradCheck(Tally& t, const GradCheckResult& r, const std::string& what, std::size_t groups) {
  t.Require(r.group_error.size() == groups, what + ": " + std::to_string(r.group_error.size()) + " parameter groups checked");
  for (const auto& [group, err] : r.group_error) {
    const std::string g(ParamGroupName(group));
    t.Require(err < 1e-4, what + ": group " + g + " rel error " + Fmt("%.2e", err));
    t.Require(r.group_coordinates.at(group) >= 200, what + ": group " + g + " has too few coordinates");
  }
}

void JointGradients(Tally& t) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::pair<MvMode, bool>> variants = {
      {MvMode::kNone, true}, {MvMode::kFull, true}, {MvMode::kL2, true}, {MvMode::kL2, false}, {MvMode::kKl, true}};
  for (const auto& [mode, stop] : variants) {
    JointFixture f = MakeJointFixture();
    f.config.mv_mode = mode;
    f.config.l2_stop_gradient = stop;
    const std::string name = std::string(MvModeName(mode)) + (stop ? "" : " (through rv)");
    ModelParams p = ModelParams::Init(f.config.encoder, static_cast<int>(f.labels.size()));
    Rng rng(9);
    for (auto& r : p.Tensors()) {
      if (r.group == ParamGroup::kCrf || r.group == ParamGroup::kLayerNorm) {
        for (Eigen::Index i = 0; i < r.value->size(); ++i) (*r.value)(i) += 0.3 * rng.Normal();
      }
    }
    const ModelParams frozen = p;
    ModelParams grads = p.ZerosLike();
    double analytic = 0.0;
    for (const auto& ex : f.examples) analytic += ComputeJointLoss(p, ex, f.config, f.mask, &grads, 1.0).total;
    auto loss = [&] {
      double v = 0.0;
      for (const auto& ex : f.examples) v += OracleJointLoss(p, frozen, ex, f.config, f.mask);
      return v;
    };
    t.Require(std::abs(analytic - loss()) < 1e-9, name + ": loss value differs from oracle");
    const GradCheckResult r = GradCheck(loss, p.Tensors(), std::as_const(grads).Tensors(), 1e-5, 200, 1);
    RequireGradCheck(t, r, name, 5);
    t.Note(name + " " + Fmt("%.1e", r.max_rel_error));
  }
  const double secs = Seconds(start);
  t.Require(secs < 60.0, "runtime " + Fmt("%.1f s", secs) + " >= 60 s");
  t.Note(Fmt("%.1f s", secs));
}

// -------------------------------------------------------------- noise

void TypoCalibration(Tally& t) {
  std::vector<std::string> alphabet;
  for (char c = 'a'; c <= 'z'; ++c) alphabet.emplace_back(1, c);
  Rng text_rng(7);
  std::string text;
  for (int w = 0; w < 200000; ++w) {
    if (w > 0) text += ' ';
    for (int i = 0; i < 5; ++i) text += static_cast<char>('a' + text_rng.Index(26));
  }
  for (double p : {0.1, 0.2, 0.3}) {
    TypoChannel ch;
    ch.p = p;
    ch.alphabet = alphabet;
    ch.seed = 17;
    TypoStats st;
    InduceTypos(text, ch, &st);
    const double q = p / 3.0;
    auto check = [&](const char* op, std::size_t events, std::size_t sites) {
      const double rate = static_cast<double>(events) / static_cast<double>(sites);
      const double sigma = std::sqrt(q * (1.0 - q) / static_cast<double>(sites));
      t.Require(sites >= 1000000, std::string(op) + ": fewer than 1e6 sites");
      t.Require(std::abs(rate - q) <= 3.0 * sigma,
                std::string(op) + " rate " + Fmt("%.5f", rate) + " outside p/3 +- 3 sigma at p=" + Fmt("%.1f", p));
      return std::abs(rate - q) / sigma;
    };
    const double z = std::max({check("delete", st.deletions, st.letter_sites),
                               check("substitute", st.substitutions, st.letter_sites),
                               check("insert", st.insertions, st.slot_sites)});
    t.Note("p=" + Fmt("%.1f", p) + " max |z| " + Fmt("%.2f", z));
  }

  Rng rng(8);
  const Dataset d = testing::RandomDataset(rng, 10000, 12);
  std::size_t mismatched = 0;
  for (double p : {0.3, 1.0}) {
    TypoChannel ch;
    ch.p = p;
    ch.alphabet = AlphabetFromCorpus(d);
    ch.seed = 5;
    const Dataset noisy = InduceTypos(d, ch);
    for (std::size_t i = 0; i < d.size(); ++i) {
      mismatched += utf8::SplitWhitespace(SentenceText(noisy[i].tokens)).size() != d[i].tokens.size() ||
                    noisy[i].tokens.size() != d[i].tokens.size();
    }
  }
  t.Require(mismatched == 0, std::to_string(mismatched) + " sentences changed token count");
  t.Note("token counts kept on 2 x 10^4 sentences");
}

std::size_t OracleLevenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    }
  }
  return d[a.size()][b.size()];
}

void TerAndOcrPresets(Tally& t) {
  Rng rng(11);
  std::size_t mismatched = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string gold = RandomWord(rng, "abc dé中", 1, 30);
    std::string noisy = RandomWord(rng, "abc dé中", 0, 30);
    if (i % 2 == 0) {
      // Half the pairs are light edits of the gold string.
      std::u32string g = utf8::Decode(gold);
      const std::size_t edits = rng.Index(4);
      for (std::size_t e = 0; e < edits && !g.empty(); ++e) g[rng.Index(g.size())] = U'x';
      noisy = utf8::Encode(g);
    }
    const std::u32string g = utf8::Decode(gold);
    const double oracle = static_cast<double>(OracleLevenshtein(utf8::Decode(noisy), g)) / static_cast<double>(g.size());
    mismatched += TokenErrorRate(std::vector<std::string>{noisy}, std::vector<std::string>{gold}) != oracle;
  }
  t.Require(mismatched == 0, std::to_string(mismatched) + " of 1000 pairs differ from the DP oracle");
  t.Note("1000 TER pairs exact");

  const Dataset corpus = ReadConllFile(std::string(ROBNER_DATA_DIR) + "/toy.conll");
  const double targets[] = {0.025, 0.08, 0.14, 0.26};
  for (int level = 1; level <= 4; ++level) {
    std::vector<std::string> noisy, gold;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const OcrResult r = InduceOcr(corpus[i].tokens, OcrPreset(level, DeriveSeed(2026, i)));
      noisy.push_back(SentenceText(r.tokens));
      gold.push_back(SentenceText(corpus[i].tokens));
    }
    const double ter = TokenErrorRate(noisy, gold);
    const double target = targets[level - 1];
    t.Require(std::abs(ter - target) <= 0.2 * target,
              "OCR level " + std::to_string(level) + " rate " + Fmt("%.4f", ter) + " outside +-20% of " + Fmt("%.3f", target));
    t.Note("L" + std::to_string(level) + " " + Fmt("%.4f", ter));
  }
}

void LabelProjection(Tally& t) {
  Rng rng(13);
  const std::vector<std::string> tags = {"LOC", "ORG", "PER"};
  std::vector<std::string> alphabet;
  for (char c = 'a'; c <= 'z'; ++c) alphabet.emplace_back(1, c);
  std::size_t checked = 0, bad_count = 0, bad_bio = 0, emptied = 0;
  for (int i = 0; i < 10000; ++i) {
    LabeledSentence gold;
    gold.id = std::to_string(i);
    const std::size_t n = 1 + rng.Index(12);
    for (std::size_t w = 0; w < n; ++w) gold.tokens.push_back(RandomWord(rng, "lI1O0rnmcldeaouvwhbs5S8B,.", 1, 7));
    gold.labels = RandomBio(rng, n, tags);
    std::vector<std::string> noisy;
    if (i % 5 == 4) {
      TypoChannel ch;
      ch.p = 0.3;
      ch.alphabet = alphabet;
      ch.seed = DeriveSeed(1, i);
      noisy = utf8::SplitWhitespace(InduceTypos(SentenceText(gold.tokens), ch));
    } else {
      const OcrResult r = InduceOcr(gold.tokens, OcrPreset(1 + i % 5, DeriveSeed(2, i)));
      if (r.empty) {
        ++emptied;
        continue;
      }
      noisy = r.tokens;
    }
    const LabeledSentence p = ProjectSentence(gold, noisy);
    ++checked;
    bad_count += p.labels.size() != noisy.size() || p.tokens != noisy;
    bad_bio += !IsBioValid(p.labels);
  }
  t.Require(bad_count == 0, std::to_string(bad_count) + " projections with wrong label count");
  t.Require(bad_bio == 0, std::to_string(bad_bio) + " projections not BIO-valid");
  t.Note(std::to_string(checked) + " sentences projected, " + std::to_string(emptied) + " fully dropped by OCR skipped");
}

// ------------------------------------------------------------ retrieval

IndexedUnit Unit(std::string id, std::string sentence) {
  IndexedUnit u;
  u.sent_id = std::move(id);
  u.sentence = sentence;
  u.paragraph = std::move(sentence);
  return u;
}

void Bm25(Tally& t) {
  const InvertedIndex idx =
      InvertedIndex::Build({Unit("d0", "the cat sat"), Unit("d1", "The cat ate the fish"), Unit("d2", "dogs bark")});
  // N = 3, avgdl = 10/3, k1 = 1.2, b = 0.75; idf = ln(1 + (N - df + 0.5) / (df + 0.5)).
  const double idf_cat = std::log(1.0 + 1.5 / 2.5);
  const double idf_fish = std::log(1.0 + 2.5 / 1.5);
  const double norm0 = 0.25 + 0.75 * 3.0 / (10.0 / 3.0);
  const double norm1 = 0.25 + 0.75 * 5.0 / (10.0 / 3.0);
  const auto hits = idx.Search("cat fish fish", 10);
  t.Require(hits.size() == 2, "fixture returns " + std::to_string(hits.size()) + " hits");
  if (hits.size() == 2) {
    t.Require(hits[0].unit == 1 && hits[1].unit == 0, "fixture ranking");
    t.Require(std::abs(hits[0].score - (idf_cat + idf_fish) * 2.2 / (1.0 + 1.2 * norm1)) < 1e-9, "d1 score");
    t.Require(std::abs(hits[1].score - idf_cat * 2.2 / (1.0 + 1.2 * norm0)) < 1e-9, "d0 score");
  }
  const auto the = idx.Search("the", 10);
  t.Require(the.size() == 2 && std::abs(the[0].score - idf_cat * 2.0 * 2.2 / (2.0 + 1.2 * norm1)) < 1e-9,
            "tf=2 score");

  Rng rng(12);
  std::size_t violations = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<IndexedUnit> units;
    const std::size_t n = 1 + rng.Index(20);
    for (std::size_t u = 0; u < n; ++u) {
      std::vector<std::string> words;
      const std::size_t len = 1 + rng.Index(8);
      for (std::size_t w = 0; w < len; ++w) words.push_back(RandomWord(rng, "abcde", 1, 2));
      units.push_back(Unit(std::to_string(u), utf8::Join(words, " ")));
    }
    const InvertedIndex index = InvertedIndex::Build(units);
    std::vector<std::string> q;
    for (int w = 0; w < 3; ++w) q.push_back(RandomWord(rng, "abcdef", 1, 2));
    const std::set<std::string> qs(q.begin(), q.end());
    for (const auto& h : index.Search(utf8::Join(q, " "), 20)) {
      const auto terms = AnalyzeText(units[h.unit].sentence);
      violations += std::none_of(terms.begin(), terms.end(), [&](const auto& x) { return qs.count(x) > 0; });
    }
  }
  t.Require(violations == 0, std::to_string(violations) + " zero-overlap units returned");
  t.Note("fixture within 1e-9; 500 random corpora");
}

void InfoNceChecks(Tally& t) {
  const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(8, 4, 0.5);
  const double l8 = InfoNce(same, same, 0.3).loss;
  t.Require(std::abs(l8 - std::log(8.0)) < 1e-9, "uniform N=8 loss " + Fmt("%.12f", l8));
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 4, 0.5);
  t.Require(InfoNce(one, one, 0.3).loss == 0.0, "N=1 loss is not 0");

  Rng rng(6);
  Eigen::MatrixXd a(16, 16), b(16, 16);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a(i) = rng.Normal();
    b(i) = rng.Normal();
  }
  const InfoNceResult r = InfoNce(a, b, 0.3);
  const GradCheckResult g = GradCheck([&] { return InfoNce(a, b, 0.3).loss; },
                                      {{"noisy", ParamGroup::kEmbedding, &a}, {"gold", ParamGroup::kAttention, &b}},
                                      {{"noisy", ParamGroup::kEmbedding, &r.grad_noisy},
                                       {"gold", ParamGroup::kAttention, &r.grad_gold}});
  RequireGradCheck(t, g, "InfoNCE inputs", 2);

  EncoderConfig c;
  c.d_model = 32;
  c.n_heads = 2;
  c.n_layers = 2;
  c.d_ff = 32;
  c.max_len = 8;
  c.vocab_size = 10;
  c.seed = 4;
  EncoderParams p = EncoderParams::Init(c);
  for (auto& tensor : p.Tensors()) {
    if (tensor.group == ParamGroup::kLayerNorm) {
      for (Eigen::Index i = 0; i < tensor.value->size(); ++i) (*tensor.value)(i) += 0.2 * rng.Normal();
    }
  }
  const std::vector<std::vector<int>> noisy = {{2, 3, 4}, {5, 6}, {7, 8, 9, 2}};
  const std::vector<std::vector<int>> gold = {{2, 3}, {5, 6, 6}, {7, 9, 2}};
  auto embed = [&](const std::vector<std::vector<int>>& s) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(s.size()), c.d_model);
    for (std::size_t i = 0; i < s.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = EmbedSentenceVector(p, s[i]);
    return m;
  };
  std::vector<SentenceEmbedding> fn, fg;
  Eigen::MatrixXd en(3, c.d_model), eg(3, c.d_model);
  for (int i = 0; i < 3; ++i) {
    fn.push_back(EmbedSentence(p, noisy[i]));
    fg.push_back(EmbedSentence(p, gold[i]));
    en.row(i) = fn.back().vector;
    eg.row(i) = fg.back().vector;
  }
  const InfoNceResult re = InfoNce(en, eg, 0.3);
  EncoderParams grads = p.ZerosLike();
  for (int i = 0; i < 3; ++i) {
    EmbedSentenceBackward(p, noisy[i], fn[i], re.grad_noisy.row(i).transpose(), &grads);
    EmbedSentenceBackward(p, gold[i], fg[i], re.grad_gold.row(i).transpose(), &grads);
  }
  const GradCheckResult ge = GradCheck([&] { return InfoNce(embed(noisy), embed(gold), 0.3).loss; }, p.Tensors(),
                                       std::as_const(grads).Tensors(), 1e-5, 200, 3);
  RequireGradCheck(t, ge, "InfoNCE through encoder", 4);
  t.Note("ln 8 " + Fmt("%.2e", std::abs(l8 - std::log(8.0))) + "; grad rel err " + Fmt("%.1e", g.max_rel_error) +
         " / " + Fmt("%.1e", ge.max_rel_error));
}

std::vector<Neighbor> BruteForce(const EmbeddingStore& s, const Eigen::VectorXf& q, std::size_t k) {
  std::vector<Neighbor> all;
  for (std::size_t r = 0; r < s.count(); ++r) {
    double dot = 0.0;
    for (int c = 0; c < s.dim(); ++c) dot += static_cast<double>(s.vectors(static_cast<Eigen::Index>(r), c)) * q(c);
    all.push_back({s.ids[r], dot});
  }
  std::sort(all.begin(), all.end(),
            [](const Neighbor& a, const Neighbor& b) { return a.score != b.score ? a.score > b.score : a.id < b.id; });
  all.resize(std::min(k, all.size()));
  return all;
}

// IVF recall@10 on structureless data, reported for reference.
double IsotropicRecall() {
  Rng rng(22);
  EmbeddingStore store;
  Eigen::VectorXd v(32);
  for (std::uint64_t i = 0; i < 10000; ++i) {
    for (int j = 0; j < 32; ++j) v(j) = rng.Normal();
    store.Add(i, v);
  }
  const IvfIndex ivf = IvfBuild(store, 64, 5);
  double overlap = 0.0;
  for (int q = 0; q < 200; ++q) {
    for (int j = 0; j < 32; ++j) v(j) = rng.Normal();
    const Eigen::VectorXf query = v.normalized().cast<float>();
    const auto exact = KnnExact(store, query, 10);
    for (const auto& n : IvfSearch(ivf, store, query, 10, 8)) {
      overlap += std::any_of(exact.begin(), exact.end(), [&](const Neighbor& e) { return e.id == n.id; });
    }
  }
  return overlap / 2000.0;
}

void DenseSearch(Tally& t) {
  // 64 Gaussian clusters in 32 dimensions, unit-normalized.
  const int dim = 32;
  Rng rng(21);
  Eigen::MatrixXd centers(64, dim);
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers(i) = rng.Normal();
  auto draw = [&] {
    Eigen::VectorXd v = centers.row(static_cast<Eigen::Index>(rng.Index(64))).transpose();
    for (int j = 0; j < dim; ++j) v(j) += 1.2 * rng.Normal();
    return v;
  };
  EmbeddingStore store;
  for (std::uint64_t i = 0; i < 10000; ++i) store.Add(i, draw());
  std::vector<Eigen::VectorXf> queries;
  for (int i = 0; i < 1000; ++i) queries.push_back(draw().normalized().cast<float>());

  std::size_t knn_bad = 0;
  std::vector<std::vector<Neighbor>> exact;
  for (const auto& q : queries) {
    exact.push_back(KnnExact(store, q, 10));
    knn_bad += exact.back() != BruteForce(store, q, 10);
  }
  t.Require(knn_bad == 0, std::to_string(knn_bad) + " exact KNN results differ from brute force");

  const IvfIndex ivf = IvfBuild(store, 64, 5);
  std::size_t full_bad = 0;
  double overlap = 0.0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    full_bad += IvfSearch(ivf, store, queries[i], 10, 64) != exact[i];
    const auto approx = IvfSearch(ivf, store, queries[i], 10, 8);
    for (const auto& n : approx) {
      overlap += std::any_of(exact[i].begin(), exact[i].end(), [&](const Neighbor& e) { return e.id == n.id; });
    }
  }
  const double recall = overlap / (10.0 * static_cast<double>(queries.size()));
  t.Require(full_bad == 0, std::to_string(full_bad) + " IVF nprobe=c results differ from exact");
  t.Require(recall >= 0.9, "IVF recall@10 " + Fmt("%.3f", recall) + " < 0.9");
  t.Note("1000 queries x 10k vectors exact; IVF c=64 nprobe=8 recall@10 " + Fmt("%.3f", recall) +
         " on clustered data, " + Fmt("%.3f", IsotropicRecall()) + " on isotropic Gaussians (not gated)");
}

// A separable toy set: each clean sentence is four words from a 30-word pool
// and its noisy twin swaps two of them for that word's fixed misspelling.
std::vector<SentencePair> ToyPairs(Rng& rng, std::size_t count) {
  std::vector<std::string> pool, variant;
  for (int i = 0; i < 30; ++i) {
    pool.push_back(RandomWord(rng, "abcdefghijklmnopqrstuvwxyz", 4, 7));
    std::u32string cps = utf8::Decode(pool.back());
    const std::size_t at = rng.Index(cps.size());
    cps[at] = U'a' + static_cast<char32_t>((cps[at] - U'a' + 1 + rng.Index(25)) % 26);
    variant.push_back(utf8::Encode(cps));
  }
  std::set<std::vector<std::size_t>> seen;
  std::vector<SentencePair> pairs;
  while (pairs.size() < count) {
    std::vector<std::size_t> words;
    for (int w = 0; w < 4; ++w) words.push_back(rng.Index(pool.size()));
    if (!seen.insert(words).second) continue;
    SentencePair p;
    for (std::size_t w : words) p.gold.push_back(pool[w]);
    p.noisy = p.gold;
    const std::size_t a = rng.Index(4);
    const std::size_t b = (a + 1 + rng.Index(3)) % 4;
    p.noisy[a] = variant[words[a]];
    p.noisy[b] = variant[words[b]];
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void ContrastiveTraining(Tally& t) {
  Rng rng(31);
  const std::vector<SentencePair> pairs = ToyPairs(rng, 250);
  const std::vector<SentencePair> train(pairs.begin(), pairs.begin() + 150);
  const std::vector<SentencePair> held(pairs.begin() + 150, pairs.end());
  std::vector<std::vector<std::string>> vocab_sents;
  for (const auto& p : train) {
    vocab_sents.push_back(p.gold);
    vocab_sents.push_back(p.noisy);
  }
  const Vocabulary vocab = Vocabulary::Build(vocab_sents, 1);
  ContrastiveConfig c;
  c.encoder.d_model = 32;
  c.encoder.n_heads = 2;
  c.encoder.n_layers = 1;
  c.encoder.d_ff = 64;
  c.encoder.max_len = 48;
  c.encoder.vocab_size = static_cast<int>(vocab.size());
  c.epochs = 20;
  c.batch_size = 16;
  c.learning_rate = 0.1;
  c.tau = 0.1;
  c.seed = 3;
  // No dev set: the final parameters are kept.
  const ContrastiveResult r = TrainContrastive(train, {}, vocab, c);
  EncoderConfig init = c.encoder;
  init.seed = c.seed;
  const RecallReport before = EvaluatePairs(EncoderParams::Init(init), vocab, held, {1, 4, 16, 64});
  const RecallReport rep = EvaluatePairs(r.params, vocab, held, {1, 4, 16, 64});
  const double r1 = rep.recall.at(1);
  t.Require(r1 >= 0.9, "held-out recall@1 " + Fmt("%.3f", r1) + " < 0.9");
  double mean = 0.0;
  for (int k : kRecallAvgKs) mean += rep.recall.at(k) / 4.0;
  t.Require(std::abs(mean - rep.recall_avg) < 1e-12, "recall_avg is not the mean over k in {1,4,16,64}");
  t.Require(rep.recall.at(1) <= rep.recall.at(4) && rep.recall.at(4) <= rep.recall.at(16) &&
                rep.recall.at(16) <= rep.recall.at(64),
            "recall not monotone in k");
  t.Note("150 train / 100 held-out pairs, recall@1 " + Fmt("%.2f", r1) + " (untrained " +
         Fmt("%.2f", before.recall.at(1)) + "), recall_avg " + Fmt("%.3f", rep.recall_avg) + " (untrained " +
         Fmt("%.3f", before.recall_avg) + ")");
}

// --------------------------------------------------------- BERTScore, PCA

TokenEmbeddingSet RandomSet(Rng& rng, std::string id, int n, int d) {
  TokenEmbeddingSet s;
  s.id = std::move(id);
  s.tokens.resize(n, d);
  for (Eigen::Index i = 0; i < s.tokens.size(); ++i) s.tokens(i) = rng.Normal();
  s.tokens.rowwise().normalize();
  return s;
}

double OracleBertF1(const TokenEmbeddingSet& c, const TokenEmbeddingSet& r) {
  auto cosine = [](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      dot += a(k) * b(k);
      na += a(k) * a(k);
      nb += b(k) * b(k);
    }
    return std::max(0.0, dot / std::sqrt(na * nb));
  };
  double p = 0.0, rc = 0.0;
  for (Eigen::Index i = 0; i < c.tokens.rows(); ++i) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < r.tokens.rows(); ++j) best = std::max(best, cosine(c.tokens.row(i), r.tokens.row(j)));
    p += best;
  }
  for (Eigen::Index j = 0; j < r.tokens.rows(); ++j) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < c.tokens.rows(); ++i) best = std::max(best, cosine(c.tokens.row(i), r.tokens.row(j)));
    rc += best;
  }
  p /= static_cast<double>(c.tokens.rows());
  rc /= static_cast<double>(r.tokens.rows());
  return p + rc > 0.0 ? 2 * p * rc / (p + rc) : 0.0;
}

void BertScoreChecks(Tally& t) {
  const Vocabulary vocab =
      Vocabulary::Build(std::vector<std::vector<std::string>>{{"the", "river", "Varenna", "flows"}}, 1);
  EncoderConfig c;
  c.d_model = 16;
  c.n_heads = 2;
  c.n_layers = 2;
  c.d_ff = 32;
  c.max_len = 32;
  c.vocab_size = static_cast<int>(vocab.size());
  const EncoderParams p = EncoderParams::Init(c);
  const TokenEmbeddingSet self = EmbedTokens(p, vocab, {"the", "river", "Varena", "flows"}, "q");
  t.Require(std::abs(BertScore(self, self).f1 - 1.0) < 1e-6, "self-pair F1 is not 1");
  TokenEmbeddingSet a{"a", Eigen::MatrixXd::Identity(2, 4)};
  TokenEmbeddingSet b{"b", Eigen::MatrixXd::Zero(2, 4)};
  b.tokens(0, 2) = 1.0;
  b.tokens(1, 3) = 1.0;
  t.Require(BertScore(a, b).f1 == 0.0, "orthogonal pair F1 is not 0");

  Rng rng(2);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const TokenEmbeddingSet x = RandomSet(rng, "x", 1 + static_cast<int>(rng.Index(8)), 6);
    const TokenEmbeddingSet y = RandomSet(rng, "y", 1 + static_cast<int>(rng.Index(8)), 6);
    worst = std::max(worst, std::abs(BertScore(x, y).f1 - OracleBertF1(x, y)));
  }
  t.Require(worst < 1e-9, "random pairs differ from the oracle by " + Fmt("%.2e", worst));

  std::vector<TokenEmbeddingSet> store;
  for (int i = 0; i < 20; ++i) store.push_back(RandomSet(rng, "s" + std::to_string(i), 2 + static_cast<int>(rng.Index(5)), 4));
  std::size_t rank_bad = 0;
  for (int qi = 0; qi < 20; ++qi) {
    std::vector<std::pair<double, std::size_t>> oracle;
    for (std::size_t i = 0; i < store.size(); ++i) {
      if (static_cast<int>(i) != qi) oracle.emplace_back(-OracleBertF1(store[qi], store[i]), i);
    }
    std::sort(oracle.begin(), oracle.end());
    const auto hits = SelfRetrieve(store[qi], store, 19);
    for (std::size_t h = 0; h < oracle.size(); ++h) rank_bad += h >= hits.size() || hits[h].index != oracle[h].second;
  }
  t.Require(rank_bad == 0, std::to_string(rank_bad) + " self-retrieval ranks differ from the pairwise oracle");
  t.Note("500 random pairs max |delta| " + Fmt("%.1e", worst) + "; 20-sentence store ranking exact");
}

void PcaChecks(Tally& t) {
  Rng rng(5);
  const int dim = 16;
  Eigen::MatrixXd mix(dim, dim);
  for (Eigen::Index i = 0; i < mix.size(); ++i) mix(i) = rng.Normal();
  Eigen::MatrixXd data(1000, dim);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (int j = 0; j < dim; ++j) data(i, j) = rng.Normal() * (1.0 + j);
  }
  data = data * mix;
  const PcaModel m = PcaFit(data, dim);
  const double ortho =
      (m.components * m.components.transpose() - Eigen::MatrixXd::Identity(dim, dim)).cwiseAbs().maxCoeff();
  double err = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const Eigen::VectorXd v = data.row(i).transpose();
    err = std::max(err, (m.components.transpose() * m.Transform(v) + m.mean - v).cwiseAbs().maxCoeff());
  }
  t.Require(ortho < 1e-6, "||CC^T - I||_inf " + Fmt("%.2e", ortho));
  t.Require(err < 1e-6, "reconstruction error " + Fmt("%.2e", err));
  t.Note("orthonormality " + Fmt("%.1e", ortho) + ", reconstruction " + Fmt("%.1e", err));
}

void F1Fixture(Tally& t) {
  const PrfScore s = EntityF1(std::vector<std::vector<std::string>>{{"B-PER", "I-PER", "O", "O"}},
                              std::vector<std::vector<std::string>>{{"B-PER", "I-PER", "O", "B-LOC"}});
  t.Require(std::abs(s.precision - 1.0) < 5e-4, "precision " + Fmt("%.4f", s.precision));
  t.Require(std::abs(s.recall - 0.5) < 5e-4, "recall " + Fmt("%.4f", s.recall));
  t.Require(std::abs(s.f1 - 0.667) < 5e-4, "f1 " + Fmt("%.4f", s.f1));
  t.Note("P " + Fmt("%.3f", s.precision) + " R " + Fmt("%.3f", s.recall) + " F1 " + Fmt("%.3f", s.f1));
}

// ------------------------------------------------------------ end to end

TrainConfig EndToEndConfig(MvMode mode, int vocab_size) {
  TrainConfig c;
  c.mv_mode = mode;
  c.epochs = 60;
  c.batch_size = 8;
  c.encoder_lr = 0.02;
  c.budget = 64;
  c.encoder.d_model = 32;
  c.encoder.n_heads = 2;
  c.encoder.n_layers = 2;
  c.encoder.d_ff = 64;
  c.encoder.max_len = 64;
  c.encoder.vocab_size = vocab_size;
  return c;
}

void EndToEnd(Tally& t) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset gold = GenerateNerCorpus(500, 14);
  std::set<std::string> surfaces;
  for (const auto& e : SyntheticEntities()) surfaces.insert(e.surface);
  TypoChannel ch;
  ch.p = 0.2;
  ch.alphabet = AlphabetFromCorpus(gold);
  ch.seed = 15;
  const Dataset noisy = InduceTypos(gold, ch);
  const LabelSet labels = LabelSet::FromDataset(gold);

  // Clean training text stands in for a pretrained vocabulary, so corrupted
  // words fall back to characters in training and test alike.
  const Vocabulary vocab = Vocabulary::Build(Dataset(gold.begin(), gold.begin() + 300), 1);
  auto examples = [&](std::size_t from, std::size_t to) {
    std::vector<TrainingExample> out;
    for (std::size_t i = from; i < to; ++i) {
      out.push_back(MakeExample(noisy[i], {SentenceText(gold[i].tokens)}, vocab, labels, 64));
    }
    return out;
  };
  const auto train = examples(0, 300);
  const auto dev = examples(300, 400);
  const auto test = examples(400, 500);

  int rv_wins = 0;
  double base_ov = 0.0, mv_ov = 0.0, mv_rv = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const TrainResult base = Train(train, dev, labels, EndToEndConfig(MvMode::kNone, static_cast<int>(vocab.size())), seed);
    const TrainResult mv = Train(train, dev, labels, EndToEndConfig(MvMode::kKl, static_cast<int>(vocab.size())), seed);
    const double b = ViewF1(base.params, test, View::kOriginal, labels);
    const double ov = ViewF1(mv.params, test, View::kOriginal, labels);
    const double rv = ViewF1(mv.params, test, View::kRetrieval, labels);
    rv_wins += rv >= ov;
    base_ov += b / 4.0;
    mv_ov += ov / 4.0;
    mv_rv += rv / 4.0;
    per_seed += " s" + std::to_string(seed) + ":" + Fmt("%.3f", b) + "/" + Fmt("%.3f", ov) + "/" + Fmt("%.3f", rv);
  }
  const double secs = Seconds(start);
  t.Require(surfaces.size() == 50, "corpus has " + std::to_string(surfaces.size()) + " entity surface forms");
  t.Require(rv_wins >= 3, "RV >= OV in only " + std::to_string(rv_wins) + " of 4 seeds");
  t.Require(mv_ov >= base_ov, "multi-view OV " + Fmt("%.3f", mv_ov) + " < baseline " + Fmt("%.3f", base_ov));
  t.Require(secs < 600.0, "runtime " + Fmt("%.0f s", secs) + " >= 600 s");
  t.Note("test F1 mean baseline " + Fmt("%.3f", base_ov) + ", KL OV " + Fmt("%.3f", mv_ov) + ", KL RV " +
         Fmt("%.3f", mv_rv) + "; RV>=OV in " + std::to_string(rv_wins) + "/4;" + per_seed + " (base/ov/rv); " +
         Fmt("%.0f s", secs));
}

// ----------------------------------------------------------- determinism

std::map<std::string, std::string> Snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = s.str();
  }
  return files;
}

void Determinism(Tally& t) {
  const fs::path dir = fs::temp_directory_path() / "robner_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  std::ofstream(p("train.ini")) << "[train]\nmv_mode = kl\nepochs = 2\nbatch_size = 4\nseeds = 1,2\nbudget = 64\n"
                                   "[encoder]\nd_model = 8\nn_layers = 1\nd_ff = 16\nmax_len = 64\n";
  const std::vector<std::vector<std::string>> stages = {
      {"synth", "--out-dir", dir.string(), "--sentences", "80", "--seed", "4"},
      {"noise", "--in", p("train.conll"), "--out", p("ntrain.conll"), "--p", "0.2", "--seed", "1"},
      {"noise", "--in", p("dev.conll"), "--out", p("ndev.conll"), "--p", "0.2", "--seed", "2"},
      {"noise", "--mode", "ocr", "--level", "3", "--in", p("test.conll"), "--out", p("ocr.conll"), "--seed", "3"},
      {"align", "--gold", p("test.conll"), "--noisy", p("ocr.conll"), "--out", p("ntest.conll"), "--stats",
       p("align.json")},
      {"index", "--knowledge", p("knowledge.jsonl"), "--out", p("index.json")},
      {"retrieve", "--index", p("index.json"), "--queries", p("ntrain.conll"), "--out", p("ntrain.ctx.jsonl"),
       "--mode", "sent-link"},
      {"retrieve", "--index", p("index.json"), "--queries", p("ndev.conll"), "--out", p("ndev.ctx.jsonl")},
      {"retrieve", "--index", p("index.json"), "--queries", p("ntest.conll"), "--out", p("ntest.ctx.jsonl"),
       "--mode", "para"},
      {"retrieve", "--backend", "gold", "--gold", p("train.conll"), "--queries", p("ntrain.conll"), "--out",
       p("gold.ctx.jsonl")},
      {"dense", "--knowledge", p("knowledge.jsonl"), "--queries", p("ntest.conll"), "--out", p("dense.ctx.jsonl"),
       "--pairs-noisy", p("ntrain.conll"), "--pairs-gold", p("train.conll"), "--epochs", "1", "--d-model", "8",
       "--pca", "4", "--ivf", "4", "--nprobe", "2"},
      {"self-retrieve", "--store", p("train.conll"), "--queries", p("ntest.conll"), "--out", p("self.ctx.jsonl"),
       "--d-model", "8"},
      {"train", "--config", p("train.ini"), "--train", p("ntrain.conll"), "--dev", p("ndev.conll"),
       "--train-contexts", p("ntrain.ctx.jsonl"), "--dev-contexts", p("ndev.ctx.jsonl"), "--out", p("model")},
      {"eval", "--model", p("model/seed-1/model.bin"), "--gold", p("ntest.conll"), "--contexts",
       p("ntest.ctx.jsonl"), "--json", p("m1.json"), "--out", p("pred1.conll"), "--setting", "kl"},
      {"eval", "--model", p("model/seed-2/model.bin"), "--gold", p("ntest.conll"), "--contexts",
       p("ntest.ctx.jsonl"), "--json", p("m2.json"), "--setting", "kl"},
  };
  const std::vector<std::string> report = {"report", p("m1.json"), p("m2.json"), "--json", p("report.json")};
  auto run_all = [&](bool force) {
    for (auto args : stages) {
      if (force) args.push_back("--force");
      std::ostringstream out, err;
      const int code = cli::Run(args, out, err);
      t.Require(code == 0, args[0] + " exited " + std::to_string(code) + ": " + err.str());
    }
    std::ostringstream out, err;
    t.Require(cli::Run(report, out, err) == 0, "report failed: " + err.str());
  };
  run_all(false);
  const auto first = Snapshot(dir);
  run_all(true);
  const auto second = Snapshot(dir);
  std::size_t differing = 0;
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != bytes) {
      ++differing;
      t.Require(false, name + " differs between runs");
    }
  }
  t.Require(first.size() == second.size(), "rerun produced a different file set");
  t.Note(std::to_string(first.size()) + " artifacts from " + std::to_string(stages.size() + 1) +
         " stage runs byte-identical");
  fs::remove_all(dir);
}

}  // namespace
}  // namespace robner

int main(int argc, char** argv) {
  using robner::Tally;
  const std::vector<std::pair<std::string, std::function<void(Tally&)>>> criteria = {
      {"crf matches exhaustive enumeration", robner::CrfOracle},
      {"joint-loss gradients match finite differences", robner::JointGradients},
      {"crf emission gradient equals marginals minus one-hot", robner::CrfGradientIdentity},
      {"typo channel rates and token counts", robner::TypoCalibration},
      {"token error rate oracle and OCR preset rates", robner::TerAndOcrPresets},
      {"label projection length and BIO validity", robner::LabelProjection},
      {"BM25 fixture and overlap property", robner::Bm25},
      {"InfoNCE values and gradients", robner::InfoNceChecks},
      {"exact and IVF dense search", robner::DenseSearch},
      {"contrastive encoder recall", robner::ContrastiveTraining},
      {"BERTScore and self-retrieval ranking", robner::BertScoreChecks},
      {"PCA orthonormality and reconstruction", robner::PcaChecks},
      {"entity F1 fixture", robner::F1Fixture},
      {"end-to-end multi-view trend", robner::EndToEnd},
      {"pipeline determinism", robner::Determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(id)) continue;
    Tally t;
    try {
      criteria[i].second(t);
    } catch (const std::exception& e) {
      t.Require(false, std::string("exception: ") + e.what());
    }
    failed += !t.ok();
    std::printf("%s %2d %s: %s\n", t.ok() ? "PASS" : "FAIL", id, criteria[i].first.c_str(), t.Detail().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
