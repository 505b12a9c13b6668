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

// Two-view training: the original view (noisy words only) and the retrieval
// view (noisy words, separator, retrieved context) share one model. Their
// CRF likelihoods are optionally tied by an L2 or KL consistency term.

#ifndef ROBNER_TRAINER_H_
#define ROBNER_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "robner/corpus.h"
#include "robner/neural.h"

namespace robner {

enum class MvMode { kNone, kL2, kKl, kFull };

MvMode ParseMvMode(std::string_view name);
std::string_view MvModeName(MvMode mode);

enum class View { kOriginal, kRetrieval };

struct TrainConfig {
  MvMode mv_mode = MvMode::kKl;
  double encoder_lr = 0.01;
  double crf_lr_ratio = 5.0;
  int epochs = 20;
  int batch_size = 8;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
  double mv_weight = 1.0;
  bool l2_stop_gradient = true;
  // Global gradient-norm clip; 0 disables.
  double clip_norm = 5.0;
  std::size_t budget = 256;
  std::string retrieval_backend = "gold";
  std::string retrieval_mode = "sent";
  int top_m = 10;
  EncoderConfig encoder;

  void Validate() const;
  // The view whose dev F1 selects the checkpoint.
  View deployed_view() const {
    return mv_mode == MvMode::kFull ? View::kRetrieval : View::kOriginal;
  }
};

// INI-style text: [train], [encoder] and [retrieval] sections of key = value.
TrainConfig ParseTrainConfig(std::string_view text);
std::string SerializeTrainConfig(const TrainConfig& config);

inline constexpr double kLogFloor = 1e-12;

struct L2Consistency {
  double value = 0.0;
  Tensor grad_ov;  // d value / d ov
  Tensor grad_rv;  // zero when the retrieval view is stop-gradiented
};

// sum_i ||rv_i - ov_i||^2 over word rows.
L2Consistency ConsistencyL2(const Tensor& ov, const Tensor& rv,
                            bool stop_gradient_rv = true);

struct KlConsistency {
  double cross_entropy = 0.0;  // sum_i sum_y -q~ log q
  double entropy = 0.0;        // sum_i H(q~_i)
  double value = 0.0;          // cross_entropy - entropy
  // d value / d log q(y_i); q~ is held constant.
  Tensor grad_log_q;
};

// q_tilde: retrieval-view marginals; q: original-view marginals.
KlConsistency ConsistencyKl(const Tensor& q_tilde, const Tensor& q);

// One labeled sentence prepared for both views.
struct TrainingExample {
  std::string id;
  ViewBatch ov;
  ViewBatch rv;
};

// Contexts are joined with the separator token and truncated to the budget.
TrainingExample MakeExample(const LabeledSentence& sentence,
                            const std::vector<std::string>& contexts,
                            const Vocabulary& vocab, const LabelSet& labels,
                            std::size_t budget);

struct JointLoss {
  double l_text = 0.0;
  double l_retrieval = 0.0;
  double l_mv = 0.0;
  double total = 0.0;
};

// Loss of one example under config.mv_mode. When grads is non-null, adds
// scale * d total / d params into it.
JointLoss ComputeJointLoss(const ModelParams& params,
                           const TrainingExample& example,
                           const TrainConfig& config,
                           const Tensor& transition_mask,
                           ModelParams* grads = nullptr, double scale = 1.0);

// Sums per-example losses over a batch, averages the gradient, clips and
// applies one optimizer step. Throws DivergenceError on a non-finite loss
// or gradient.
JointLoss JointStep(ModelParams* params, MomentumSgd* optimizer,
                    const std::vector<const TrainingExample*>& batch,
                    const TrainConfig& config, const Tensor& transition_mask);

double GroupLearningRate(const TrainConfig& config, ParamGroup group);

std::vector<int> PredictIndices(const ModelParams& params,
                                const TrainingExample& example, View view,
                                const Tensor& transition_mask);

std::vector<std::vector<std::string>> Predict(
    const ModelParams& params, const std::vector<TrainingExample>& examples,
    View view, const LabelSet& labels);

// Entity F1 of a view against the examples' own labels.
double ViewF1(const ModelParams& params,
              const std::vector<TrainingExample>& examples, View view,
              const LabelSet& labels);

struct EpochMetrics {
  int epoch = 0;
  double l_text = 0.0;
  double l_retrieval = 0.0;
  double l_mv = 0.0;
  double dev_f1_ov = 0.0;
  double dev_f1_rv = 0.0;

  std::string ToJson() const;
};

struct TrainResult {
  ModelParams params;  // best by deployed-view dev F1
  std::vector<EpochMetrics> history;
  int best_epoch = 0;
  double best_dev_f1 = 0.0;
};

// Trains from a fresh initialization seeded by `seed`. config.encoder must
// carry the vocabulary size. Loss components are per-sentence means.
TrainResult Train(const std::vector<TrainingExample>& train,
                  const std::vector<TrainingExample>& dev,
                  const LabelSet& labels, const TrainConfig& config,
                  std::uint64_t seed,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::map<ParamGroup, double> group_error;
  std::map<ParamGroup, std::size_t> group_coordinates;
};

// Central differences against `analytic` on up to `per_group` sampled
// coordinates of each parameter group (all of them when the group is
// smaller). Relative error is |a - n| / max(|a|, |n|, 1e-4).
GradCheckResult GradCheck(const std::function<double()>& loss,
                          const std::vector<TensorRef>& params,
                          const std::vector<ConstTensorRef>& analytic,
                          double eps = 1e-5, std::size_t per_group = 200,
                          std::uint64_t seed = 0);

}  // namespace robner

#endif  // ROBNER_TRAINER_H_
