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

#include "stages.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "robner/align.h"
#include "robner/contexts.h"
#include "robner/corpus.h"
#include "robner/dense.h"
#include "robner/error.h"
#include "robner/eval.h"
#include "robner/noise.h"
#include "robner/rng.h"
#include "robner/self_retrieval.h"
#include "robner/sparse.h"
#include "robner/synthetic.h"
#include "robner/trainer.h"
#include "robner/utf8.h"

namespace robner::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr int kArtifactVersion = 1;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes through a temporary file so an interrupted stage never leaves a
// partial artifact that a later run would mistake for a finished one.
void WriteFile(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << content;
    if (!out) throw DataError("write failed for " + path);
  }
  fs::rename(tmp, p);
}

void RequireFile(const std::string& path, const std::string& flag) {
  if (path.empty()) throw ConfigError(flag + " is required");
  if (!fs::is_regular_file(path)) {
    throw ConfigError(flag + ": no such file " + path);
  }
}

bool Skip(const std::string& out, bool force, Io io) {
  if (force || !fs::exists(out)) return false;
  io.err << "skip: " << out << " exists (use --force to rebuild)\n";
  return true;
}

void WriteMeta(const std::string& out, const std::string& stage,
               json params) {
  json meta = {{"format", "robner-artifact"},
               {"version", kArtifactVersion},
               {"stage", stage},
               {"params", std::move(params)}};
  WriteFile(out + ".meta.json", meta.dump(2) + "\n");
}

std::string Percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * v);
  return buf;
}

std::vector<std::vector<std::string>> Tokens(const Dataset& d) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : d) out.push_back(s.tokens);
  return out;
}

std::vector<std::string> Texts(const Dataset& d) {
  std::vector<std::string> out;
  for (const auto& s : d) out.push_back(SentenceText(s.tokens));
  return out;
}

// Paths ending in .txt hold one whitespace-tokenized sentence per line.
bool IsPlainText(const std::string& path) {
  return fs::path(path).extension() == ".txt";
}

std::string WriteSentences(const Dataset& d, const std::string& path) {
  if (!IsPlainText(path)) return WriteConll(d);
  std::string text;
  for (const auto& line : Texts(d)) text += line + "\n";
  return text;
}

// Noisy sentences from CoNLL or plain text. Plain-text lines borrow the ids
// of the gold sentences they are paired with and carry no labels.
Dataset ReadNoisy(const std::string& path, const Dataset& gold) {
  if (!IsPlainText(path)) return ReadConllFile(path);
  Dataset out;
  std::istringstream in(ReadFile(path));
  std::string line;
  while (std::getline(in, line)) {
    LabeledSentence s;
    s.tokens = utf8::SplitWhitespace(line);
    if (s.tokens.empty()) {
      throw DataError(path + ": empty line " + std::to_string(out.size() + 1));
    }
    s.id = out.size() < gold.size() ? gold[out.size()].id : std::to_string(out.size());
    s.labels.assign(s.tokens.size(), std::string(kOutsideLabel));
    out.push_back(std::move(s));
  }
  return out;
}

std::map<std::string, std::vector<std::string>> ContextMap(
    const std::string& path) {
  std::map<std::string, std::vector<std::string>> out;
  if (path.empty()) return out;
  RequireFile(path, "contexts");
  for (auto& r : ParseContextsJsonl(ReadFile(path))) {
    if (!out.emplace(r.sentence_id, std::move(r.contexts)).second) {
      throw DataError(path + ": duplicate sentence id " + r.sentence_id);
    }
  }
  return out;
}

const std::vector<std::string>& ContextsFor(
    const std::map<std::string, std::vector<std::string>>& map,
    const std::string& id, const std::string& what) {
  static const std::vector<std::string> kNone;
  if (map.empty()) return kNone;
  auto it = map.find(id);
  if (it == map.end()) {
    throw DataError(what + ": no contexts for sentence " + id);
  }
  return it->second;
}

void WriteContexts(const std::string& out, const Dataset& queries,
                   const std::vector<std::vector<std::string>>& contexts,
                   const std::string& backend, const std::string& mode) {
  std::vector<ContextRecord> records;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    records.push_back({queries[i].id, backend, mode, contexts[i]});
  }
  WriteFile(out, WriteContextsJsonl(records));
}

// A model directory holds vocab.txt, labels.txt and config.ini next to one
// seed-<n>/model.bin per seed.
fs::path ModelRoot(const std::string& model) {
  const fs::path dir = fs::path(model).parent_path();
  if (fs::exists(dir / "vocab.txt")) return dir;
  if (fs::exists(dir.parent_path() / "vocab.txt")) return dir.parent_path();
  throw DataError("no vocab.txt next to " + model);
}

std::string LabelsText(const LabelSet& labels) {
  std::string s;
  for (const auto& t : labels.tags()) s += t + "\n";
  return s;
}

LabelSet ParseLabels(const std::string& text) {
  return LabelSet(utf8::SplitWhitespace(text));
}

Eigen::VectorXd Normalized(const Eigen::VectorXd& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw DataError("zero embedding");
  return v / n;
}

// Sentences the OCR channel blanked out are absent from its output; the
// noise stage lists their indices in the artifact metadata.
Dataset DropBlanked(Dataset gold, const std::string& noisy_path) {
  const std::string meta_path = noisy_path + ".meta.json";
  if (!fs::exists(meta_path)) return gold;
  const json meta = json::parse(ReadFile(meta_path));
  const auto& params = meta.at("params");
  if (!params.contains("dropped")) return gold;
  const auto dropped = params["dropped"].get<std::vector<std::size_t>>();
  Dataset kept;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!std::binary_search(dropped.begin(), dropped.end(), i)) kept.push_back(std::move(gold[i]));
  }
  return kept;
}

}  // namespace

int RunNoise(const NoiseOptions& o, Io io) {
  RequireFile(o.in, "--in");
  if (o.out.empty()) throw ConfigError("--out is required");
  if (Skip(o.out, o.force, io)) return 0;
  const Dataset gold = ReadConllFile(o.in);
  json params = {{"mode", o.mode}, {"seed", o.seed}, {"in", o.in}};
  Dataset noisy;
  std::vector<std::string> noisy_text;
  if (o.mode == "typos") {
    TypoChannel c;
    c.p = o.p;
    c.alphabet = AlphabetFromCorpus(gold);
    c.seed = o.seed;
    c.Validate();
    TypoStats st;
    noisy = InduceTypos(gold, c, &st);
    noisy_text = Texts(noisy);
    params["p"] = o.p;
    params["restored_words"] = st.restored_words;
  } else if (o.mode == "ocr") {
    OcrChannel c = OcrPreset(o.level, o.seed);
    if (!o.confusion.empty()) {
      RequireFile(o.confusion, "--confusion");
      c.confusions = ParseConfusionTable(ReadFile(o.confusion));
    }
    c.Validate();
    std::vector<std::size_t> dropped;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      OcrChannel per = c;
      per.seed = DeriveSeed(o.seed, i);
      const OcrResult r = InduceOcr(gold[i].tokens, per);
      noisy_text.push_back(SentenceText(r.tokens));
      if (r.empty) {
        dropped.push_back(i);
        continue;
      }
      noisy.push_back(ProjectSentence(gold[i], r.tokens));
    }
    params["level"] = o.level;
    params["dropped"] = dropped;
  } else {
    throw ConfigError("--mode must be typos or ocr");
  }
  const double ter = TokenErrorRate(noisy_text, Texts(gold));
  params["token_error_rate"] = ter;
  WriteFile(o.out, WriteSentences(noisy, o.out));
  WriteMeta(o.out, "noise", params);
  io.out << "sentences " << noisy.size() << " token_error_rate " << Percent(ter)
         << "%\n";
  return 0;
}

int RunAlign(const AlignOptions& o, Io io) {
  RequireFile(o.gold, "--gold");
  RequireFile(o.noisy, "--noisy");
  if (o.out.empty()) throw ConfigError("--out is required");
  if (Skip(o.out, o.force, io)) return 0;
  Dataset gold = DropBlanked(ReadConllFile(o.gold), o.noisy);
  const Dataset noisy = ReadNoisy(o.noisy, gold);
  if (gold.size() != noisy.size()) {
    throw DataError("gold has " + std::to_string(gold.size()) +
                    " sentences, noisy has " + std::to_string(noisy.size()));
  }
  Dataset projected;
  std::vector<EditAlignment> alignments;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    alignments.push_back(AlignTokens(gold[i].tokens, noisy[i].tokens));
    projected.push_back({noisy[i].id, noisy[i].tokens,
                         ProjectLabels(gold[i], noisy[i].tokens, alignments.back())});
  }
  const CorrectionStats st = ComputeCorrectionStats(gold, projected, alignments);
  const double ter = TokenErrorRate(projected, gold);
  WriteFile(o.out, WriteConll(projected));
  WriteMeta(o.out, "align", {{"gold", o.gold}, {"noisy", o.noisy}});
  const json stats = {{"ent", st.ent},       {"ent_true", st.ent_true},
                      {"ent_rate", st.ent_rate}, {"token", st.token},
                      {"token_true", st.token_true}, {"token_rate", st.token_rate},
                      {"token_error_rate", ter}};
  if (!o.stats.empty()) WriteFile(o.stats, stats.dump(2) + "\n");
  io.out << "entities " << st.ent_true << "/" << st.ent << " intact, tokens "
         << st.token_true << "/" << st.token << " intact, token_error_rate "
         << Percent(ter) << "%\n";
  return 0;
}

int RunIndex(const IndexOptions& o, Io io) {
  RequireFile(o.knowledge, "--knowledge");
  if (o.out.empty()) throw ConfigError("--out is required");
  if (Skip(o.out, o.force, io)) return 0;
  const auto units = ParseUnitsJsonl(ReadFile(o.knowledge));
  const InvertedIndex idx = InvertedIndex::Build(units, o.k1, o.b);
  WriteFile(o.out, idx.Serialize());
  io.out << "indexed " << idx.size() << " units, " << idx.postings().size()
         << " terms\n";
  return 0;
}

int RunRetrieve(const RetrieveOptions& o, Io io) {
  RequireFile(o.queries, "--queries");
  if (o.out.empty()) throw ConfigError("--out is required");
  if (o.top_m < 1) throw ConfigError("--top-m must be >= 1");
  const ContextMode mode = ParseContextMode(o.mode);
  if (Skip(o.out, o.force, io)) return 0;
  const Dataset queries = ReadConllFile(o.queries);
  std::vector<std::vector<std::string>> contexts(queries.size());
  if (o.backend == "bm25") {
    RequireFile(o.index, "--index");
    const InvertedIndex idx = InvertedIndex::Deserialize(ReadFile(o.index));
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto hits = idx.Search(SentenceText(queries[i].tokens), o.top_m);
      contexts[i] = RenderContexts(hits, idx.units(), mode, o.top_m);
    }
  } else if (o.backend == "gold") {
    RequireFile(o.gold, "--gold");
    const Dataset gold = DropBlanked(ReadConllFile(o.gold), o.queries);
    if (gold.size() != queries.size()) {
      throw DataError("--gold and --queries differ in sentence count");
    }
    for (std::size_t i = 0; i < gold.size(); ++i) {
      contexts[i] = {SentenceText(gold[i].tokens)};
    }
  } else if (o.backend != "none") {
    throw ConfigError("--backend must be bm25, gold or none");
  }
  WriteContexts(o.out, queries, contexts, o.backend, std::string(ContextModeName(mode)));
  WriteMeta(o.out, "retrieve",
            {{"backend", o.backend}, {"mode", ContextModeName(mode)}, {"top_m", o.top_m},
             {"queries", o.queries}});
  io.out << "wrote contexts for " << queries.size() << " sentences\n";
  return 0;
}

int RunDense(const DenseOptions& o, Io io) {
  RequireFile(o.knowledge, "--knowledge");
  RequireFile(o.queries, "--queries");
  if (o.out.empty()) throw ConfigError("--out is required");
  if (o.top_m < 1) throw ConfigError("--top-m must be >= 1");
  if (o.pairs_noisy.empty() != o.pairs_gold.empty()) {
    throw ConfigError("--pairs-noisy and --pairs-gold go together");
  }
  const ContextMode mode = ParseContextMode(o.mode);
  if (Skip(o.out, o.force, io)) return 0;
  const auto units = ParseUnitsJsonl(ReadFile(o.knowledge));
  const Dataset queries = ReadConllFile(o.queries);

  std::vector<SentencePair> pairs;
  std::vector<std::vector<std::string>> clean;
  for (const auto& u : units) clean.push_back(utf8::SplitWhitespace(u.sentence));
  if (!o.pairs_noisy.empty()) {
    RequireFile(o.pairs_noisy, "--pairs-noisy");
    RequireFile(o.pairs_gold, "--pairs-gold");
    const Dataset pn = ReadConllFile(o.pairs_noisy);
    const Dataset pg = ReadConllFile(o.pairs_gold);
    if (pn.size() != pg.size() || pn.empty()) {
      throw DataError("contrastive pair files must be nonempty and aligned");
    }
    for (std::size_t i = 0; i < pn.size(); ++i) {
      pairs.push_back({pn[i].tokens, pg[i].tokens});
      clean.push_back(pg[i].tokens);
    }
  }
  const Vocabulary vocab = Vocabulary::Build(clean, 1);
  EncoderConfig enc;
  enc.d_model = o.d_model;
  enc.n_heads = 2;
  enc.n_layers = 2;
  enc.d_ff = 2 * o.d_model;
  enc.max_len = 128;
  enc.vocab_size = static_cast<int>(vocab.size());
  enc.seed = o.seed;

  json params = {{"mode", ContextModeName(mode)}, {"top_m", o.top_m}, {"seed", o.seed},
                 {"d_model", o.d_model}, {"pca", o.pca}, {"ivf", o.ivf},
                 {"nprobe", o.nprobe}};
  EncoderParams model = EncoderParams::Init(enc);
  if (!pairs.empty()) {
    const std::size_t dev_n = std::max<std::size_t>(1, pairs.size() / 10);
    const std::vector<SentencePair> train(pairs.begin(), pairs.end() - dev_n);
    const std::vector<SentencePair> dev(pairs.end() - dev_n, pairs.end());
    if (train.empty()) throw DataError("need at least two contrastive pairs");
    ContrastiveConfig cc;
    cc.encoder = enc;
    cc.epochs = o.epochs;
    cc.seed = o.seed;
    const ContrastiveResult r = TrainContrastive(train, dev, vocab, cc);
    model = r.params;
    params["dev_recall_avg"] = r.best_recall_avg;
    params["best_step"] = r.best_step;
    io.err << "contrastive: best dev recall_avg " << r.best_recall_avg << " at step "
           << r.best_step << "\n";
  }

  EmbeddingStore store;
  for (std::size_t u = 0; u < units.size(); ++u) {
    const auto ids = SentenceIds(clean[u], vocab, enc.max_len);
    if (ids.empty()) continue;
    store.Add(u, EmbedSentenceVector(model, ids));
  }
  if (store.count() == 0) throw DataError("no knowledge unit could be embedded");
  std::optional<PcaModel> pca;
  if (o.pca > 0) {
    pca = PcaFit(store.vectors.cast<double>(), o.pca);
    store = pca->TransformStore(store);
  }
  std::optional<IvfIndex> ivf;
  if (o.ivf > 0) ivf = IvfBuild(store, o.ivf, o.seed);

  std::vector<std::vector<std::string>> contexts(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto ids = SentenceIds(queries[i].tokens, vocab, enc.max_len);
    if (ids.empty()) continue;
    Eigen::VectorXd q = EmbedSentenceVector(model, ids);
    if (pca) q = Normalized(pca->Transform(q));
    const Eigen::VectorXf qf = q.cast<float>();
    const auto nn = ivf ? IvfSearch(*ivf, store, qf, o.top_m, o.nprobe)
                        : KnnExact(store, qf, o.top_m);
    std::vector<RetrievalHit> hits;
    for (const auto& n : nn) hits.push_back({n.id, n.score});
    contexts[i] = RenderContexts(hits, units, mode, o.top_m);
  }
  WriteContexts(o.out, queries, contexts, "dense", std::string(ContextModeName(mode)));
  WriteMeta(o.out, "dense", params);
  io.out << "wrote contexts for " << queries.size() << " sentences from "
         << store.count() << " units\n";
  return 0;
}

int RunSelfRetrieve(const SelfRetrieveOptions& o, Io io) {
  RequireFile(o.store, "--store");
  RequireFile(o.queries, "--queries");
  if (o.out.empty()) throw ConfigError("--out is required");
  if (o.top_m < 1) throw ConfigError("--top-m must be >= 1");
  if (Skip(o.out, o.force, io)) return 0;
  const Dataset store = ReadConllFile(o.store);
  const Dataset queries = ReadConllFile(o.queries);
  // A corpus retrieving from itself must not return each query's own entry.
  const bool same = fs::equivalent(o.store, o.queries);

  Vocabulary vocab;
  EncoderParams params;
  if (!o.model.empty()) {
    RequireFile(o.model, "--model");
    vocab = Vocabulary::Deserialize(ReadFile((ModelRoot(o.model) / "vocab.txt").string()));
    params = LoadCheckpoint(o.model).encoder;
  } else {
    vocab = Vocabulary::Build(store, 1);
    EncoderConfig enc;
    enc.d_model = o.d_model;
    enc.n_heads = 2;
    enc.n_layers = 2;
    enc.d_ff = 2 * o.d_model;
    enc.max_len = 256;
    enc.vocab_size = static_cast<int>(vocab.size());
    enc.seed = o.seed;
    params = EncoderParams::Init(enc);
  }
  std::vector<TokenEmbeddingSet> sets;
  for (std::size_t i = 0; i < store.size(); ++i) {
    sets.push_back(EmbedTokens(params, vocab, store[i].tokens, "s" + std::to_string(i)));
  }
  std::vector<std::vector<std::string>> contexts(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const std::string id = (same ? "s" : "q") + std::to_string(i);
    const TokenEmbeddingSet q = EmbedTokens(params, vocab, queries[i].tokens, id);
    for (const auto& hit : SelfRetrieve(q, sets, o.top_m)) {
      contexts[i].push_back(SentenceText(store[hit.index].tokens));
    }
  }
  WriteContexts(o.out, queries, contexts, "self", "sent");
  WriteMeta(o.out, "self-retrieve",
            {{"store", o.store}, {"top_m", o.top_m}, {"seed", o.seed}, {"model", o.model}});
  io.out << "wrote contexts for " << queries.size() << " sentences\n";
  return 0;
}

int RunTrain(const TrainOptions& o, Io io) {
  RequireFile(o.train, "--train");
  RequireFile(o.dev, "--dev");
  if (o.out.empty()) throw ConfigError("--out is required");
  TrainConfig cfg;
  if (!o.config.empty()) {
    RequireFile(o.config, "--config");
    cfg = ParseTrainConfig(ReadFile(o.config));
  }
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  if (cfg.mv_mode != MvMode::kNone && o.train_contexts.empty()) {
    throw ConfigError("mv_mode " + std::string(MvModeName(cfg.mv_mode)) +
                      " needs --train-contexts");
  }
  const Dataset train = ReadConllFile(o.train);
  const Dataset dev = ReadConllFile(o.dev);
  const auto train_ctx = ContextMap(o.train_contexts);
  const auto dev_ctx = ContextMap(o.dev_contexts);

  Dataset all = train;
  all.insert(all.end(), dev.begin(), dev.end());
  const LabelSet labels = LabelSet::FromDataset(all);
  std::vector<std::vector<std::string>> vocab_text = Tokens(train);
  for (const auto& s : train) {
    for (const auto& c : ContextsFor(train_ctx, s.id, "--train-contexts")) {
      vocab_text.push_back(utf8::SplitWhitespace(c));
    }
  }
  if (o.min_freq < 1) throw ConfigError("--min-freq must be >= 1");
  const Vocabulary vocab = Vocabulary::Build(vocab_text, o.min_freq);
  cfg.encoder.vocab_size = static_cast<int>(vocab.size());
  cfg.Validate();

  std::vector<TrainingExample> train_ex, dev_ex;
  for (const auto& s : train) {
    train_ex.push_back(MakeExample(s, ContextsFor(train_ctx, s.id, "--train-contexts"),
                                   vocab, labels, cfg.budget));
  }
  for (const auto& s : dev) {
    dev_ex.push_back(MakeExample(s, ContextsFor(dev_ctx, s.id, "--dev-contexts"), vocab,
                                 labels, cfg.budget));
  }
  const fs::path root(o.out);
  WriteFile((root / "vocab.txt").string(), vocab.Serialize());
  WriteFile((root / "labels.txt").string(), LabelsText(labels));
  WriteFile((root / "config.ini").string(), SerializeTrainConfig(cfg));

  json summary = json::array();
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path dir = root / ("seed-" + std::to_string(seed));
    const std::string model = (dir / "model.bin").string();
    if (Skip(model, o.force, io)) continue;
    std::string history;
    const TrainResult r = Train(train_ex, dev_ex, labels, cfg, seed, [&](const EpochMetrics& m) {
      history += m.ToJson() + "\n";
      io.err << "seed " << seed << " " << m.ToJson() << "\n";
    });
    fs::create_directories(dir);
    SaveCheckpoint(model, r.params);
    WriteFile((dir / "history.jsonl").string(), history);
    io.out << "seed " << seed << " best epoch " << r.best_epoch << " dev f1 "
           << Percent(r.best_dev_f1) << "\n";
  }
  return 0;
}

int RunEval(const EvalOptions& o, Io io) {
  RequireFile(o.gold, "--gold");
  const Dataset gold = ReadConllFile(o.gold);
  json metrics = {{"setting", o.setting}};
  PrfScore score;
  if (!o.pred.empty()) {
    RequireFile(o.pred, "--pred");
    score = EntityF1(ReadConllFile(o.pred), gold);
  } else if (!o.model.empty()) {
    RequireFile(o.model, "--model");
    if (!o.out.empty() && Skip(o.out, o.force, io)) return 0;
    const fs::path root = ModelRoot(o.model);
    const Vocabulary vocab = Vocabulary::Deserialize(ReadFile((root / "vocab.txt").string()));
    const LabelSet labels = ParseLabels(ReadFile((root / "labels.txt").string()));
    const TrainConfig cfg = ParseTrainConfig(ReadFile((root / "config.ini").string()));
    const ModelParams params = LoadCheckpoint(o.model);
    const auto ctx = ContextMap(o.contexts);
    std::vector<TrainingExample> ex;
    for (const auto& s : gold) {
      ex.push_back(MakeExample(s, ContextsFor(ctx, s.id, "--contexts"), vocab, labels, cfg.budget));
    }
    View view = cfg.deployed_view();
    if (o.view == "ov") {
      view = View::kOriginal;
    } else if (o.view == "rv") {
      view = View::kRetrieval;
    } else if (o.view != "deployed") {
      throw ConfigError("--view must be ov, rv or deployed");
    }
    const auto ov = Predict(params, ex, View::kOriginal, labels);
    const auto rv = Predict(params, ex, View::kRetrieval, labels);
    std::vector<std::vector<std::string>> gold_labels;
    for (const auto& s : gold) gold_labels.push_back(s.labels);
    metrics["seed"] = params.encoder.config.seed;
    metrics["ov_f1"] = EntityF1(ov, gold_labels).f1;
    metrics["rv_f1"] = EntityF1(rv, gold_labels).f1;
    metrics["view"] = view == View::kOriginal ? "ov" : "rv";
    const auto& chosen = view == View::kOriginal ? ov : rv;
    score = EntityF1(chosen, gold_labels);
    if (!o.out.empty()) {
      Dataset pred = gold;
      for (std::size_t i = 0; i < pred.size(); ++i) pred[i].labels = chosen[i];
      WriteFile(o.out, WriteConll(pred));
    }
  } else {
    throw ConfigError("eval needs --pred or --model");
  }
  metrics["precision"] = score.precision;
  metrics["recall"] = score.recall;
  metrics["f1"] = score.f1;
  if (!o.json.empty()) WriteFile(o.json, metrics.dump(2) + "\n");
  io.out << "precision " << Percent(score.precision) << " recall " << Percent(score.recall)
         << " f1 " << Percent(score.f1) << "\n";
  return 0;
}

int RunReport(const ReportOptions& o, Io io) {
  if (o.metrics.empty()) throw ConfigError("report needs metrics files");
  std::vector<std::string> order;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> runs;
  for (const auto& path : o.metrics) {
    RequireFile(path, "metrics");
    json m;
    try {
      m = json::parse(ReadFile(path));
    } catch (const json::exception& e) {
      throw DataError(path + ": " + e.what());
    }
    const std::string setting = m.value("setting", std::string());
    if (!runs.count(setting)) order.push_back(setting);
    auto& r = runs[setting];
    if (m.contains("ov_f1")) r.first.push_back(100.0 * m["ov_f1"].get<double>());
    if (m.contains("rv_f1")) r.second.push_back(100.0 * m["rv_f1"].get<double>());
    if (!m.contains("ov_f1") && m.contains("f1")) {
      r.first.push_back(100.0 * m["f1"].get<double>());
    }
  }
  std::vector<ReportRow> rows;
  for (const auto& s : order) {
    rows.push_back({s, AggregateRuns(runs[s].first), AggregateRuns(runs[s].second)});
  }
  io.out << FormatReportTable(rows, o.decimals);
  if (!o.json.empty()) WriteFile(o.json, ReportToJson(rows) + "\n");
  return 0;
}

int RunSynth(const SynthOptions& o, Io io) {
  if (o.out_dir.empty()) throw ConfigError("--out-dir is required");
  if (o.sentences < 10) throw ConfigError("--sentences must be >= 10");
  const fs::path dir(o.out_dir);
  const std::string marker = (dir / "knowledge.jsonl").string();
  if (Skip(marker, o.force, io)) return 0;
  const Dataset all = GenerateNerCorpus(o.sentences, o.seed);
  // 60/20/20 split in generation order.
  const std::size_t a = o.sentences * 3 / 5;
  const std::size_t b = o.sentences * 4 / 5;
  auto slice = [&](std::size_t from, std::size_t to) {
    Dataset d(all.begin() + from, all.begin() + to);
    return d;
  };
  WriteFile((dir / "train.conll").string(), WriteConll(slice(0, a)));
  WriteFile((dir / "dev.conll").string(), WriteConll(slice(a, b)));
  WriteFile((dir / "test.conll").string(), WriteConll(slice(b, all.size())));
  WriteFile(marker, WriteUnitsJsonl(GenerateKnowledge(o.seed)));
  io.out << "wrote " << o.sentences << " sentences to " << o.out_dir << "\n";
  return 0;
}

}  // namespace robner::cli
