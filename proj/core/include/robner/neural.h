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

// A small pre-norm transformer encoder trained from scratch, the two-view
// input builder, first-subtoken pooling and the CRF emission head. Every
// forward function has a hand-written reverse-mode counterpart.

#ifndef ROBNER_NEURAL_H_
#define ROBNER_NEURAL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "robner/corpus.h"
#include "robner/crf.h"

namespace robner {

using Tensor = Eigen::MatrixXd;

struct EncoderConfig {
  int d_model = 32;
  int n_layers = 2;
  int n_heads = 2;
  int d_ff = 64;
  int max_len = 256;
  int vocab_size = 0;
  std::uint64_t seed = 0;

  void Validate() const;
};

enum class ParamGroup { kEmbedding, kAttention, kFeedForward, kLayerNorm, kCrf };

std::string_view ParamGroupName(ParamGroup group);

template <typename T>
struct BasicTensorRef {
  std::string name;
  ParamGroup group;
  T* value;
};
using TensorRef = BasicTensorRef<Tensor>;
using ConstTensorRef = BasicTensorRef<const Tensor>;

struct LayerParams {
  Tensor ln1_gain, ln1_bias;
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor ln2_gain, ln2_bias;
  Tensor w1, b1, w2, b2;
};

struct EncoderParams {
  EncoderConfig config;
  Tensor token_embedding;     // vocab_size x d_model
  Tensor position_embedding;  // max_len x d_model
  std::vector<LayerParams> layers;

  // Random initialization from config.seed.
  static EncoderParams Init(const EncoderConfig& config);
  EncoderParams ZerosLike() const;

  std::vector<TensorRef> Tensors();
  std::vector<ConstTensorRef> Tensors() const;
};

struct CrfParams {
  Tensor emission_weight;  // d_model x K
  Tensor emission_bias;    // 1 x K
  Tensor transitions;      // (K+2) x (K+2), learned part; BIO mask is separate
};

struct ModelParams {
  EncoderParams encoder;
  CrfParams crf;

  static ModelParams Init(const EncoderConfig& config, int num_labels);
  ModelParams ZerosLike() const;
  int num_labels() const { return static_cast<int>(crf.emission_bias.cols()); }

  std::vector<TensorRef> Tensors();
  std::vector<ConstTensorRef> Tensors() const;
};

// The model input for one sentence: noisy subtokens, optionally followed by
// the separator and the retrieved context.
struct ViewBatch {
  std::vector<int> input_ids;
  // (first position, subtoken count) per noisy word.
  std::vector<std::pair<int, int>> word_spans;
  // True exactly at each noisy word's first subtoken.
  std::vector<bool> crf_mask;
  // -1 when no context follows.
  int separator_pos = -1;
  // Gold label indices, one per noisy word; empty at inference.
  std::vector<int> labels;

  std::size_t word_count() const { return word_spans.size(); }
  std::size_t length() const { return input_ids.size(); }
};

// Builds [noisy, SEP, context] truncated from the right to `budget`
// subtokens. Throws DataError when the noisy words alone do not fit in
// budget - 1 positions; the separator is only emitted if at least one context
// subtoken fits.
ViewBatch ConcatViews(const std::vector<std::string>& noisy_tokens,
                      const std::vector<std::string>& context_words,
                      const Vocabulary& vocab, std::size_t budget);

struct LayerCache {
  Tensor x_in, xhat1, h1, q, k, v;
  Eigen::VectorXd rstd1;
  std::vector<Tensor> attention;  // per head, L x L, rows sum to 1
  Tensor concat, x_mid, xhat2, h2, u, g;
  Eigen::VectorXd rstd2;
};

struct EncoderOutput {
  // hidden[0] is token + position embedding; hidden[l] follows block l.
  std::vector<Tensor> hidden;
  std::vector<LayerCache> layers;

  const Tensor& last() const { return hidden.back(); }
};

EncoderOutput Encode(const EncoderParams& params, const std::vector<int>& ids);

// grad_hidden[l] is d loss / d hidden[l]; empty matrices mean zero. Adds the
// parameter gradients into *grads.
void EncodeBackward(const EncoderParams& params, const std::vector<int>& ids,
                    const EncoderOutput& out,
                    const std::vector<Tensor>& grad_hidden,
                    EncoderParams* grads);

// One row per noisy word: the representation at the word's first subtoken.
Tensor FirstPool(const Tensor& reps, const ViewBatch& batch);
// Scatters word gradients back to their first-subtoken rows.
void FirstPoolBackward(const Tensor& grad_words, const ViewBatch& batch,
                       Tensor* grad_reps);

// Forward state of one view through encoder, pooling and emission head.
struct ViewForward {
  EncoderOutput encoder;
  Tensor word_reps;  // n x d
  CrfScores scores;  // emissions n x K, transitions include the mask
};

ViewForward RunView(const ModelParams& params, const ViewBatch& batch,
                    const Tensor& transition_mask);

// Backpropagates d loss / d word_reps, d loss / d emissions and
// d loss / d transitions into *grads. Empty matrices mean zero.
void BackwardView(const ModelParams& params, const ViewBatch& batch,
                  const ViewForward& forward, const Tensor& grad_word_reps,
                  const Tensor& grad_emissions, const Tensor& grad_transitions,
                  ModelParams* grads);

// Momentum SGD: v <- momentum * v + g; p <- p - lr(group) * v.
class MomentumSgd {
 public:
  explicit MomentumSgd(double momentum = 0.9) : momentum_(momentum) {}

  void Step(const std::vector<TensorRef>& params,
            const std::vector<ConstTensorRef>& grads,
            const std::function<double(ParamGroup)>& learning_rate);

 private:
  double momentum_;
  std::vector<Tensor> velocity_;
};

// Binary checkpoint: "RNCK", u32 version, u32 tensor count, then per tensor
// u32 name length, name bytes, u32 rows, u32 cols and rows*cols row-major
// little-endian f64. The config goes to path + ".cfg" as key=value text.
void SaveCheckpoint(const std::string& path, const ModelParams& params);
ModelParams LoadCheckpoint(const std::string& path);

std::string SerializeEncoderConfig(const EncoderConfig& config, int num_labels);
EncoderConfig ParseEncoderConfig(std::string_view text, int* num_labels);

}  // namespace robner

#endif  // ROBNER_NEURAL_H_
