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

// Dense sentence retrieval: encoder sentence embeddings, contrastive
// training, PCA, exact and inverted-file cosine search, recall@k.

#ifndef ROBNER_DENSE_H_
#define ROBNER_DENSE_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "robner/corpus.h"
#include "robner/neural.h"

namespace robner {

using EmbeddingMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct EmbeddingStore {
  EmbeddingMatrix vectors;  // count x dim
  std::vector<std::uint64_t> ids;

  std::size_t count() const { return ids.size(); }
  int dim() const { return static_cast<int>(vectors.cols()); }

  // Appends a row, L2-normalizing it. Throws DataError for a zero vector.
  void Add(std::uint64_t id, const Eigen::VectorXd& v);
  // Throws DataError unless rows are unit-norm (1e-5) and ids distinct.
  void Validate() const;
};

// "EMBS", u32 version 1, u64 count, u32 dim, count*dim little-endian f32
// row-major, then count little-endian u64 ids.
void WriteEmbeddingStore(std::ostream& out, const EmbeddingStore& store);
EmbeddingStore ReadEmbeddingStore(std::istream& in);
void SaveEmbeddingStore(const std::string& path, const EmbeddingStore& store);
EmbeddingStore LoadEmbeddingStore(const std::string& path);

struct Neighbor {
  std::uint64_t id = 0;
  double score = 0.0;

  bool operator==(const Neighbor&) const = default;
};

// Dot product accumulated in double, element order 0..dim-1.
double DotF(const float* a, const float* b, int dim);

// Exhaustive cosine scan; score desc, id asc. k is clamped to the count.
std::vector<Neighbor> KnnExact(const EmbeddingStore& store,
                               const Eigen::Ref<const Eigen::VectorXf>& query,
                               std::size_t k);

struct PcaModel {
  Eigen::VectorXd mean;                // dim
  Eigen::MatrixXd components;          // k x dim, orthonormal rows
  Eigen::VectorXd explained_variance;  // k, non-increasing

  // components * (v - mean).
  Eigen::VectorXd Transform(const Eigen::VectorXd& v) const;
  // Projects every row and re-normalizes to unit length.
  EmbeddingStore TransformStore(const EmbeddingStore& store) const;

  std::string ToJson() const;
  static PcaModel FromJson(std::string_view text);
};

// Top-k eigenvectors of the population covariance of the rows of `data`.
// Throws DataError when count <= k or k exceeds the covariance rank.
PcaModel PcaFit(const Eigen::MatrixXd& data, int k);

struct IvfIndex {
  Eigen::MatrixXd centroids;              // c x dim
  std::vector<std::vector<std::size_t>> lists;  // store row indices
  int nprobe = 64;

  std::string ToJson() const;
  static IvfIndex FromJson(std::string_view text);
};

// Seeded k-means++ initialization followed by `iterations` Lloyd steps;
// each row is listed under its nearest final centroid.
IvfIndex IvfBuild(const EmbeddingStore& store, int num_centroids,
                  std::uint64_t seed, int iterations = 25);

// Exact cosine ranking restricted to the lists of the nprobe centroids
// nearest to the query.
std::vector<Neighbor> IvfSearch(const IvfIndex& index,
                                const EmbeddingStore& store,
                                const Eigen::Ref<const Eigen::VectorXf>& query,
                                std::size_t k, int nprobe);

inline const std::vector<int> kRecallAvgKs = {1, 4, 16, 64};

struct RecallReport {
  std::map<int, double> recall;  // k -> fraction
  double recall_avg = 0.0;       // mean of recall at 1, 4, 16, 64
};

RecallReport RecallAtK(const std::vector<std::vector<std::uint64_t>>& retrieved,
                       const std::vector<std::uint64_t>& gold,
                       const std::vector<int>& ks);

// Flattened subtoken ids of a sentence, cut to max_len.
std::vector<int> SentenceIds(const std::vector<std::string>& tokens,
                             const Vocabulary& vocab, int max_len);

struct SentenceEmbedding {
  EncoderOutput encoder;
  Eigen::VectorXd mean;    // before normalization
  Eigen::VectorXd vector;  // unit norm
};

// Mean over positions of (first-layer + last-layer output) / 2, normalized.
SentenceEmbedding EmbedSentence(const EncoderParams& params,
                                const std::vector<int>& ids);
Eigen::VectorXd EmbedSentenceVector(const EncoderParams& params,
                                    const std::vector<int>& ids);
// Adds d loss / d params given d loss / d vector.
void EmbedSentenceBackward(const EncoderParams& params,
                           const std::vector<int>& ids,
                           const SentenceEmbedding& forward,
                           const Eigen::VectorXd& grad_vector,
                           EncoderParams* grads);

struct InfoNceResult {
  double loss = 0.0;
  Eigen::MatrixXd grad_noisy;
  Eigen::MatrixXd grad_gold;
};

// Batch mean of -log softmax_j(cos(noisy_i, gold_j) / tau)[i].
InfoNceResult InfoNce(const Eigen::MatrixXd& noisy, const Eigen::MatrixXd& gold,
                      double tau);

struct ContrastiveConfig {
  double tau = 0.3;
  int batch_size = 16;
  int epochs = 1;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double clip_norm = 5.0;
  // Dev recall is measured every `eval_every` steps and after the last.
  int eval_every = 10;
  std::uint64_t seed = 0;
  EncoderConfig encoder;

  void Validate() const;
};

struct SentencePair {
  std::vector<std::string> noisy;
  std::vector<std::string> gold;
};

struct ContrastiveResult {
  EncoderParams params;  // best by dev recall_avg
  std::vector<double> step_losses;
  double best_recall_avg = 0.0;
  int best_step = 0;
};

// Embeds each dev gold sentence into a store (ids 0..n-1) and queries it
// with the matching noisy sentence.
RecallReport EvaluatePairs(const EncoderParams& params, const Vocabulary& vocab,
                           const std::vector<SentencePair>& pairs,
                           const std::vector<int>& ks);

ContrastiveResult TrainContrastive(
    const std::vector<SentencePair>& train, const std::vector<SentencePair>& dev,
    const Vocabulary& vocab, const ContrastiveConfig& config,
    const std::function<void(int step, double loss)>& on_step = {});

}  // namespace robner

#endif  // ROBNER_DENSE_H_
