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

#include "robner/dense.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "binary_io.h"
#include "robner/error.h"
#include "robner/rng.h"

namespace robner {

using nlohmann::json;

void EmbeddingStore::Add(std::uint64_t id, const Eigen::VectorXd& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DataError("cannot store a zero or non-finite embedding");
  }
  if (count() > 0 && v.size() != dim()) {
    throw DataError("embedding dimension mismatch");
  }
  vectors.conservativeResize(static_cast<Eigen::Index>(count() + 1), v.size());
  vectors.row(vectors.rows() - 1) = (v / norm).cast<float>().transpose();
  ids.push_back(id);
}

void EmbeddingStore::Validate() const {
  if (static_cast<std::size_t>(vectors.rows()) != ids.size()) {
    throw DataError("embedding store row/id count mismatch");
  }
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!seen.insert(ids[i]).second) {
      throw DataError("duplicate embedding id " + std::to_string(ids[i]));
    }
    const double n = std::sqrt(DotF(vectors.row(i).data(), vectors.row(i).data(), dim()));
    if (std::abs(n - 1.0) > 1e-5) {
      throw DataError("embedding " + std::to_string(ids[i]) + " is not unit norm");
    }
  }
}

void WriteEmbeddingStore(std::ostream& out, const EmbeddingStore& store) {
  out.write("EMBS", 4);
  binio::PutU32(out, 1);
  binio::PutU64(out, store.count());
  binio::PutU32(out, static_cast<std::uint32_t>(store.dim()));
  for (Eigen::Index i = 0; i < store.vectors.rows(); ++i) {
    for (Eigen::Index j = 0; j < store.vectors.cols(); ++j) {
      binio::PutF32(out, store.vectors(i, j));
    }
  }
  for (std::uint64_t id : store.ids) binio::PutU64(out, id);
}

EmbeddingStore ReadEmbeddingStore(std::istream& in) {
  if (!binio::ReadMagic(in, "EMBS")) throw DataError("not an embedding store");
  if (binio::GetU32(in) != 1) throw DataError("unsupported embedding store version");
  const std::uint64_t count = binio::GetU64(in);
  const std::uint32_t dim = binio::GetU32(in);
  EmbeddingStore s;
  s.vectors.resize(static_cast<Eigen::Index>(count), dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j) s.vectors(i, j) = binio::GetF32(in);
  }
  s.ids.resize(count);
  for (auto& id : s.ids) id = binio::GetU64(in);
  return s;
}

void SaveEmbeddingStore(const std::string& path, const EmbeddingStore& store) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  WriteEmbeddingStore(out, store);
}

EmbeddingStore LoadEmbeddingStore(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return ReadEmbeddingStore(in);
}

double DotF(const float* a, const float* b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

namespace {

bool Better(const Neighbor& x, const Neighbor& y) {
  return x.score != y.score ? x.score > y.score : x.id < y.id;
}

std::vector<Neighbor> TopK(std::vector<Neighbor> all, std::size_t k) {
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + k, all.end(), Better);
  all.resize(k);
  return all;
}

void CheckQuery(const EmbeddingStore& store,
                const Eigen::Ref<const Eigen::VectorXf>& query) {
  if (query.size() != store.dim()) {
    throw DataError("query dimension differs from the store");
  }
}

double SquaredDistance(const Eigen::MatrixXd& centroids, Eigen::Index c,
                       const float* x) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < centroids.cols(); ++j) {
    const double d = centroids(c, j) - x[j];
    s += d * d;
  }
  return s;
}

Eigen::Index Nearest(const Eigen::MatrixXd& centroids, const float* x) {
  Eigen::Index best = 0;
  double best_d = SquaredDistance(centroids, 0, x);
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const double d = SquaredDistance(centroids, c, x);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

std::vector<Neighbor> KnnExact(const EmbeddingStore& store,
                               const Eigen::Ref<const Eigen::VectorXf>& query,
                               std::size_t k) {
  CheckQuery(store, query);
  std::vector<Neighbor> all(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) {
    all[i] = {store.ids[i], DotF(store.vectors.row(i).data(), query.data(), store.dim())};
  }
  return TopK(std::move(all), k);
}

Eigen::VectorXd PcaModel::Transform(const Eigen::VectorXd& v) const {
  if (v.size() != mean.size()) throw DataError("PCA input dimension mismatch");
  return components * (v - mean);
}

EmbeddingStore PcaModel::TransformStore(const EmbeddingStore& store) const {
  EmbeddingStore out;
  for (std::size_t i = 0; i < store.count(); ++i) {
    out.Add(store.ids[i],
            Transform(store.vectors.row(i).transpose().cast<double>()));
  }
  return out;
}

namespace {

json MatrixToJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[j] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

Eigen::MatrixXd MatrixFromJson(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) {
      throw DataError("ragged matrix in JSON");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

Eigen::VectorXd VectorFromJson(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> VectorToStd(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::string PcaModel::ToJson() const {
  json j = {{"format", "robner-pca"},
            {"version", 1},
            {"mean", VectorToStd(mean)},
            {"explained_variance", VectorToStd(explained_variance)},
            {"components", MatrixToJson(components)}};
  return j.dump() + "\n";
}

PcaModel PcaModel::FromJson(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "robner-pca" || j.at("version") != 1) {
      throw DataError("not a version-1 PCA model");
    }
    PcaModel m;
    m.mean = VectorFromJson(j.at("mean"));
    m.explained_variance = VectorFromJson(j.at("explained_variance"));
    m.components = MatrixFromJson(j.at("components"));
    if (m.components.rows() != m.explained_variance.size() ||
        m.components.cols() != m.mean.size()) {
      throw DataError("PCA model shapes are inconsistent");
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad PCA model: ") + e.what());
  }
}

PcaModel PcaFit(const Eigen::MatrixXd& data, int k) {
  const Eigen::Index n = data.rows();
  const Eigen::Index dim = data.cols();
  if (k < 1 || k > dim) throw DataError("PCA needs 1 <= k <= dim");
  if (n <= k) throw DataError("PCA needs more rows than components");
  PcaModel m;
  m.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - m.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw DataError("PCA eigendecomposition failed");
  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  const double top = std::max(values(dim - 1), 0.0);
  const double tol = std::max(top, 1.0) * 1e-12 * dim;
  if (values(dim - k) <= tol) {
    throw DataError("PCA: k exceeds the rank of the covariance");
  }
  m.components.resize(k, dim);
  m.explained_variance.resize(k);
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(dim - 1 - c);
    Eigen::Index arg;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    m.components.row(c) = v.transpose();
    m.explained_variance(c) = values(dim - 1 - c);
  }
  return m;
}

std::string IvfIndex::ToJson() const {
  json j = {{"format", "robner-ivf"},
            {"version", 1},
            {"nprobe", nprobe},
            {"centroids", MatrixToJson(centroids)},
            {"lists", lists}};
  return j.dump() + "\n";
}

IvfIndex IvfIndex::FromJson(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "robner-ivf" || j.at("version") != 1) {
      throw DataError("not a version-1 IVF index");
    }
    IvfIndex idx;
    idx.nprobe = j.at("nprobe").get<int>();
    idx.centroids = MatrixFromJson(j.at("centroids"));
    idx.lists = j.at("lists").get<std::vector<std::vector<std::size_t>>>();
    if (static_cast<Eigen::Index>(idx.lists.size()) != idx.centroids.rows()) {
      throw DataError("IVF list count differs from centroid count");
    }
    return idx;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad IVF index: ") + e.what());
  }
}

IvfIndex IvfBuild(const EmbeddingStore& store, int num_centroids,
                  std::uint64_t seed, int iterations) {
  const std::size_t n = store.count();
  const int dim = store.dim();
  if (num_centroids < 1 || static_cast<std::size_t>(num_centroids) > n) {
    throw DataError("IVF needs 1 <= centroids <= stored vectors");
  }
  auto row = [&](std::size_t i) { return store.vectors.row(i).data(); };
  Rng rng(seed);
  IvfIndex idx;
  idx.centroids.resize(num_centroids, dim);
  auto set_centroid = [&](int c, std::size_t i) {
    for (int j = 0; j < dim; ++j) idx.centroids(c, j) = row(i)[j];
  };

  // k-means++ seeding.
  set_centroid(0, rng.Index(n));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = SquaredDistance(idx.centroids, 0, row(i));
  for (int c = 1; c < num_centroids; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      double r = rng.Uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (r < d2[i]) {
          pick = i;
          break;
        }
        r -= d2[i];
      }
    } else {
      pick = rng.Index(n);
    }
    set_centroid(c, pick);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(idx.centroids, c, row(i)));
    }
  }

  // Lloyd iterations; an emptied cluster keeps its previous centroid.
  std::vector<Eigen::Index> assign(n);
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) assign[i] = Nearest(idx.centroids, row(i));
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(num_centroids, dim);
    std::vector<std::size_t> size(num_centroids, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < dim; ++j) sum(assign[i], j) += row(i)[j];
      ++size[assign[i]];
    }
    for (int c = 0; c < num_centroids; ++c) {
      if (size[c] > 0) idx.centroids.row(c) = sum.row(c) / static_cast<double>(size[c]);
    }
  }
  idx.lists.assign(num_centroids, {});
  for (std::size_t i = 0; i < n; ++i) {
    idx.lists[Nearest(idx.centroids, row(i))].push_back(i);
  }
  return idx;
}

std::vector<Neighbor> IvfSearch(const IvfIndex& index,
                                const EmbeddingStore& store,
                                const Eigen::Ref<const Eigen::VectorXf>& query,
                                std::size_t k, int nprobe) {
  CheckQuery(store, query);
  const Eigen::Index c = index.centroids.rows();
  if (index.centroids.cols() != store.dim()) {
    throw DataError("IVF centroids do not match the store dimension");
  }
  std::vector<std::pair<double, Eigen::Index>> order;
  for (Eigen::Index i = 0; i < c; ++i) {
    order.emplace_back(SquaredDistance(index.centroids, i, query.data()), i);
  }
  std::sort(order.begin(), order.end());
  const std::size_t probe = std::min<std::size_t>(std::max(nprobe, 0), order.size());
  std::vector<Neighbor> all;
  for (std::size_t p = 0; p < probe; ++p) {
    for (std::size_t r : index.lists[order[p].second]) {
      if (r >= store.count()) throw DataError("IVF list refers to a missing row");
      all.push_back({store.ids[r],
                     DotF(store.vectors.row(r).data(), query.data(), store.dim())});
    }
  }
  return TopK(std::move(all), k);
}

RecallReport RecallAtK(const std::vector<std::vector<std::uint64_t>>& retrieved,
                       const std::vector<std::uint64_t>& gold,
                       const std::vector<int>& ks) {
  if (retrieved.size() != gold.size()) {
    throw DataError("recall needs one gold id per query");
  }
  std::set<int> all(ks.begin(), ks.end());
  all.insert(kRecallAvgKs.begin(), kRecallAvgKs.end());
  std::map<int, double> recall;
  for (int k : all) {
    std::size_t hit = 0;
    for (std::size_t q = 0; q < gold.size(); ++q) {
      const auto& r = retrieved[q];
      const auto end = r.begin() + std::min<std::size_t>(std::max(k, 0), r.size());
      if (std::find(r.begin(), end, gold[q]) != end) ++hit;
    }
    recall[k] = gold.empty() ? 0.0 : static_cast<double>(hit) / gold.size();
  }
  RecallReport report;
  for (int k : ks) report.recall[k] = recall[k];
  for (int k : kRecallAvgKs) report.recall_avg += recall[k];
  report.recall_avg /= kRecallAvgKs.size();
  return report;
}

std::vector<int> SentenceIds(const std::vector<std::string>& tokens,
                             const Vocabulary& vocab, int max_len) {
  std::vector<int> ids;
  for (const auto& span : vocab.TokenizeSentence(tokens)) {
    for (int id : span.subtoken_ids) {
      if (static_cast<int>(ids.size()) >= max_len) return ids;
      ids.push_back(id);
    }
  }
  return ids;
}

SentenceEmbedding EmbedSentence(const EncoderParams& params,
                                const std::vector<int>& ids) {
  if (ids.empty()) throw DataError("cannot embed an empty sentence");
  SentenceEmbedding e;
  e.encoder = Encode(params, ids);
  e.mean = 0.5 * (e.encoder.hidden.front().colwise().mean() +
                  e.encoder.last().colwise().mean())
                     .transpose();
  const double norm = e.mean.norm();
  if (!(norm > 0.0)) throw DataError("sentence embedding has zero norm");
  e.vector = e.mean / norm;
  return e;
}

Eigen::VectorXd EmbedSentenceVector(const EncoderParams& params,
                                    const std::vector<int>& ids) {
  return EmbedSentence(params, ids).vector;
}

void EmbedSentenceBackward(const EncoderParams& params,
                           const std::vector<int>& ids,
                           const SentenceEmbedding& forward,
                           const Eigen::VectorXd& grad_vector,
                           EncoderParams* grads) {
  const Eigen::VectorXd& v = forward.vector;
  const Eigen::VectorXd du = (grad_vector - v * v.dot(grad_vector)) / forward.mean.norm();
  const Eigen::Index n = static_cast<Eigen::Index>(ids.size());
  const std::size_t layers = params.layers.size();
  std::vector<Tensor> grad_hidden(layers + 1);
  const Tensor rows = du.transpose().replicate(n, 1) / (2.0 * n);
  if (layers == 0) {
    grad_hidden[0] = 2.0 * rows;
  } else {
    grad_hidden[0] = rows;
    grad_hidden[layers] = rows;
  }
  EncodeBackward(params, ids, forward.encoder, grad_hidden, grads);
}

InfoNceResult InfoNce(const Eigen::MatrixXd& noisy, const Eigen::MatrixXd& gold,
                      double tau) {
  if (!(tau > 0.0)) throw ConfigError("InfoNCE temperature must be > 0");
  if (noisy.rows() != gold.rows() || noisy.cols() != gold.cols() ||
      noisy.rows() == 0) {
    throw DataError("InfoNCE needs two equally shaped nonempty batches");
  }
  const Eigen::Index n = noisy.rows();
  const Eigen::VectorXd na = noisy.rowwise().norm();
  const Eigen::VectorXd nb = gold.rowwise().norm();
  Eigen::MatrixXd sim = noisy * gold.transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) sim(i, j) /= na(i) * nb(j);
  }
  InfoNceResult r;
  Eigen::MatrixXd g(n, n);  // d loss / d sim
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd logits = sim.row(i) / tau;
    const double m = logits.maxCoeff();
    const Eigen::RowVectorXd e = (logits.array() - m).exp().matrix();
    const double s = e.sum();
    r.loss += -logits(i) + m + std::log(s);
    g.row(i) = e / s;
    g(i, i) -= 1.0;
  }
  r.loss /= n;
  g /= tau * n;
  r.grad_noisy.resize(n, noisy.cols());
  r.grad_gold.resize(n, gold.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(noisy.cols());
    double gs = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      acc += g(i, j) / (na(i) * nb(j)) * gold.row(j);
      gs += g(i, j) * sim(i, j);
    }
    r.grad_noisy.row(i) = acc - gs / (na(i) * na(i)) * noisy.row(i);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(gold.cols());
    double gs = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += g(i, j) / (na(i) * nb(j)) * noisy.row(i);
      gs += g(i, j) * sim(i, j);
    }
    r.grad_gold.row(j) = acc - gs / (nb(j) * nb(j)) * gold.row(j);
  }
  return r;
}

void ContrastiveConfig::Validate() const {
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  encoder.Validate();
}

RecallReport EvaluatePairs(const EncoderParams& params, const Vocabulary& vocab,
                           const std::vector<SentencePair>& pairs,
                           const std::vector<int>& ks) {
  const int max_len = params.config.max_len;
  EmbeddingStore store;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    store.Add(i, EmbedSentenceVector(params, SentenceIds(pairs[i].gold, vocab, max_len)));
  }
  int kmax = kRecallAvgKs.back();
  for (int k : ks) kmax = std::max(kmax, k);
  std::vector<std::vector<std::uint64_t>> retrieved;
  std::vector<std::uint64_t> gold;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Eigen::VectorXf q =
        EmbedSentenceVector(params, SentenceIds(pairs[i].noisy, vocab, max_len))
            .cast<float>();
    std::vector<std::uint64_t> ids;
    for (const auto& nb : KnnExact(store, q, kmax)) ids.push_back(nb.id);
    retrieved.push_back(std::move(ids));
    gold.push_back(i);
  }
  return RecallAtK(retrieved, gold, ks);
}

ContrastiveResult TrainContrastive(
    const std::vector<SentencePair>& train, const std::vector<SentencePair>& dev,
    const Vocabulary& vocab, const ContrastiveConfig& config,
    const std::function<void(int step, double loss)>& on_step) {
  if (train.empty()) throw DataError("contrastive training needs pairs");
  config.Validate();
  EncoderConfig enc = config.encoder;
  enc.seed = config.seed;
  EncoderParams params = EncoderParams::Init(enc);
  MomentumSgd optimizer(config.momentum);
  const int max_len = enc.max_len;

  ContrastiveResult result;
  result.params = params;
  result.best_recall_avg = -1.0;
  auto evaluate = [&](int step) {
    if (dev.empty()) {
      result.params = params;
      result.best_step = step;
      return;
    }
    const double r = EvaluatePairs(params, vocab, dev, kRecallAvgKs).recall_avg;
    if (r > result.best_recall_avg) {
      result.best_recall_avg = r;
      result.best_step = step;
      result.params = params;
    }
  };
  evaluate(0);

  std::vector<std::size_t> order(train.size());
  int step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(DeriveSeed(config.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.Index(i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const Eigen::Index b = static_cast<Eigen::Index>(end - start);
      std::vector<std::vector<int>> noisy_ids;
      std::vector<std::vector<int>> gold_ids;
      std::vector<SentenceEmbedding> noisy_fw;
      std::vector<SentenceEmbedding> gold_fw;
      Eigen::MatrixXd a(b, enc.d_model);
      Eigen::MatrixXd g(b, enc.d_model);
      for (std::size_t i = start; i < end; ++i) {
        const SentencePair& p = train[order[i]];
        noisy_ids.push_back(SentenceIds(p.noisy, vocab, max_len));
        gold_ids.push_back(SentenceIds(p.gold, vocab, max_len));
        noisy_fw.push_back(EmbedSentence(params, noisy_ids.back()));
        gold_fw.push_back(EmbedSentence(params, gold_ids.back()));
        a.row(i - start) = noisy_fw.back().vector.transpose();
        g.row(i - start) = gold_fw.back().vector.transpose();
      }
      const InfoNceResult loss = InfoNce(a, g, config.tau);
      EncoderParams grads = params.ZerosLike();
      for (Eigen::Index i = 0; i < b; ++i) {
        EmbedSentenceBackward(params, noisy_ids[i], noisy_fw[i],
                              loss.grad_noisy.row(i).transpose(), &grads);
        EmbedSentenceBackward(params, gold_ids[i], gold_fw[i],
                              loss.grad_gold.row(i).transpose(), &grads);
      }
      double sq = 0.0;
      for (const auto& t : std::as_const(grads).Tensors()) sq += t.value->squaredNorm();
      if (!std::isfinite(loss.loss) || !std::isfinite(sq)) {
        throw DivergenceError("contrastive training diverged at step " +
                              std::to_string(step + 1) + " (loss " +
                              std::to_string(loss.loss) + ")");
      }
      if (config.clip_norm > 0.0 && std::sqrt(sq) > config.clip_norm) {
        const double f = config.clip_norm / std::sqrt(sq);
        for (const auto& t : grads.Tensors()) *t.value *= f;
      }
      optimizer.Step(params.Tensors(), std::as_const(grads).Tensors(),
                     [&](ParamGroup) { return config.learning_rate; });
      ++step;
      result.step_losses.push_back(loss.loss);
      if (on_step) on_step(step, loss.loss);
      if (step % config.eval_every == 0) evaluate(step);
    }
  }
  if (step % config.eval_every != 0) evaluate(step);
  if (dev.empty()) result.best_recall_avg = 0.0;
  return result;
}

}  // namespace robner
