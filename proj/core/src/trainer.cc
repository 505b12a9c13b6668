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

#include "robner/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "robner/crf.h"
#include "robner/error.h"
#include "robner/eval.h"
#include "robner/rng.h"
#include "robner/utf8.h"

namespace robner {

MvMode ParseMvMode(std::string_view name) {
  if (name == "none") return MvMode::kNone;
  if (name == "l2") return MvMode::kL2;
  if (name == "kl") return MvMode::kKl;
  if (name == "full") return MvMode::kFull;
  throw ConfigError("unknown mv_mode '" + std::string(name) +
                    "' (expected none, l2, kl or full)");
}

std::string_view MvModeName(MvMode mode) {
  switch (mode) {
    case MvMode::kNone: return "none";
    case MvMode::kL2: return "l2";
    case MvMode::kKl: return "kl";
    case MvMode::kFull: return "full";
  }
  return "none";
}

void TrainConfig::Validate() const {
  if (!(encoder_lr > 0.0)) throw ConfigError("encoder_lr must be > 0");
  if (!(crf_lr_ratio > 0.0)) throw ConfigError("crf_lr_ratio must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (mv_weight < 0.0) throw ConfigError("mv_weight must be >= 0");
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
  if (top_m < 1) throw ConfigError("top_m must be >= 1");
  if (budget < 2) throw ConfigError("budget must be >= 2");
  if (budget > static_cast<std::size_t>(encoder.max_len)) {
    throw ConfigError("budget exceeds encoder max_len");
  }
}

namespace {

namespace pt = boost::property_tree;

template <typename T>
T Get(const pt::ptree& section, const std::string& key, T fallback) {
  const auto child = section.get_child_optional(key);
  if (!child) return fallback;
  try {
    return child->get_value<T>();
  } catch (const pt::ptree_bad_data&) {
    throw ConfigError("bad value for '" + key + "'");
  }
}

void CheckKeys(const pt::ptree& section, const std::string& name,
               const std::vector<std::string>& known) {
  for (const auto& [key, value] : section) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown key '" + key + "' in [" + name + "]");
    }
  }
}

std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto words = utf8::SplitWhitespace(item);
    if (words.size() != 1) throw ConfigError("bad seed list '" + text + "'");
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(words[0], &used));
      if (used != words[0].size()) throw std::invalid_argument(words[0]);
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed '" + words[0] + "'");
    }
  }
  return seeds;
}

}  // namespace

TrainConfig ParseTrainConfig(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  TrainConfig c;
  for (const auto& [name, section] : tree) {
    if (name != "train" && name != "encoder" && name != "retrieval") {
      throw ConfigError("unknown config section [" + name + "]");
    }
  }
  const pt::ptree empty;
  const auto& train = tree.get_child("train", empty);
  CheckKeys(train, "train",
            {"mv_mode", "encoder_lr", "crf_lr_ratio", "epochs", "batch_size",
             "seeds", "mv_weight", "l2_stop_gradient", "clip_norm", "budget"});
  c.mv_mode = ParseMvMode(Get<std::string>(train, "mv_mode", "kl"));
  c.encoder_lr = Get(train, "encoder_lr", c.encoder_lr);
  c.crf_lr_ratio = Get(train, "crf_lr_ratio", c.crf_lr_ratio);
  c.epochs = Get(train, "epochs", c.epochs);
  c.batch_size = Get(train, "batch_size", c.batch_size);
  if (auto s = train.get_optional<std::string>("seeds")) c.seeds = ParseSeeds(*s);
  c.mv_weight = Get(train, "mv_weight", c.mv_weight);
  c.l2_stop_gradient = Get(train, "l2_stop_gradient", c.l2_stop_gradient);
  c.clip_norm = Get(train, "clip_norm", c.clip_norm);
  c.budget = Get(train, "budget", c.budget);

  const auto& enc = tree.get_child("encoder", empty);
  CheckKeys(enc, "encoder", {"d_model", "n_layers", "n_heads", "d_ff", "max_len"});
  c.encoder.d_model = Get(enc, "d_model", c.encoder.d_model);
  c.encoder.n_layers = Get(enc, "n_layers", c.encoder.n_layers);
  c.encoder.n_heads = Get(enc, "n_heads", c.encoder.n_heads);
  c.encoder.d_ff = Get(enc, "d_ff", c.encoder.d_ff);
  c.encoder.max_len = Get(enc, "max_len", c.encoder.max_len);

  const auto& ret = tree.get_child("retrieval", empty);
  CheckKeys(ret, "retrieval", {"backend", "mode", "top_m"});
  c.retrieval_backend = Get(ret, "backend", c.retrieval_backend);
  c.retrieval_mode = Get(ret, "mode", c.retrieval_mode);
  c.top_m = Get(ret, "top_m", c.top_m);
  c.Validate();
  return c;
}

std::string SerializeTrainConfig(const TrainConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "[train]\n"
      << "mv_mode = " << MvModeName(c.mv_mode) << "\n"
      << "encoder_lr = " << c.encoder_lr << "\n"
      << "crf_lr_ratio = " << c.crf_lr_ratio << "\n"
      << "epochs = " << c.epochs << "\n"
      << "batch_size = " << c.batch_size << "\n"
      << "seeds = ";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    out << (i ? "," : "") << c.seeds[i];
  }
  out << "\n"
      << "mv_weight = " << c.mv_weight << "\n"
      << "l2_stop_gradient = " << (c.l2_stop_gradient ? "true" : "false") << "\n"
      << "clip_norm = " << c.clip_norm << "\n"
      << "budget = " << c.budget << "\n\n"
      << "[encoder]\n"
      << "d_model = " << c.encoder.d_model << "\n"
      << "n_layers = " << c.encoder.n_layers << "\n"
      << "n_heads = " << c.encoder.n_heads << "\n"
      << "d_ff = " << c.encoder.d_ff << "\n"
      << "max_len = " << c.encoder.max_len << "\n\n"
      << "[retrieval]\n"
      << "backend = " << c.retrieval_backend << "\n"
      << "mode = " << c.retrieval_mode << "\n"
      << "top_m = " << c.top_m << "\n";
  return out.str();
}

L2Consistency ConsistencyL2(const Tensor& ov, const Tensor& rv,
                            bool stop_gradient_rv) {
  if (ov.rows() != rv.rows() || ov.cols() != rv.cols()) {
    throw DataError("L2 consistency needs equally shaped views");
  }
  L2Consistency out;
  const Tensor diff = ov - rv;
  out.value = diff.squaredNorm();
  out.grad_ov = 2.0 * diff;
  out.grad_rv = stop_gradient_rv ? Tensor::Zero(rv.rows(), rv.cols())
                                 : Tensor(-out.grad_ov);
  return out;
}

KlConsistency ConsistencyKl(const Tensor& q_tilde, const Tensor& q) {
  if (q_tilde.rows() != q.rows() || q_tilde.cols() != q.cols()) {
    throw DataError("KL consistency needs equally shaped marginals");
  }
  KlConsistency out;
  out.grad_log_q = Tensor::Zero(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index y = 0; y < q.cols(); ++y) {
      const double t = q_tilde(i, y);
      if (t == 0.0) continue;
      out.cross_entropy -= t * std::log(std::max(q(i, y), kLogFloor));
      out.entropy -= t * std::log(std::max(t, kLogFloor));
      if (q(i, y) > kLogFloor) out.grad_log_q(i, y) = -t;
    }
  }
  out.value = out.cross_entropy - out.entropy;
  return out;
}

TrainingExample MakeExample(const LabeledSentence& sentence,
                            const std::vector<std::string>& contexts,
                            const Vocabulary& vocab, const LabelSet& labels,
                            std::size_t budget) {
  TrainingExample ex;
  ex.id = sentence.id;
  std::vector<std::string> words;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    if (i > 0) words.emplace_back(kSeparatorToken);
    for (auto& w : utf8::SplitWhitespace(contexts[i])) words.push_back(std::move(w));
  }
  ex.ov = ConcatViews(sentence.tokens, {}, vocab, budget);
  ex.rv = ConcatViews(sentence.tokens, words, vocab, budget);
  ex.ov.labels = labels.Encode(sentence.labels);
  ex.rv.labels = ex.ov.labels;
  return ex;
}

JointLoss ComputeJointLoss(const ModelParams& params,
                           const TrainingExample& example,
                           const TrainConfig& config,
                           const Tensor& transition_mask, ModelParams* grads,
                           double scale) {
  const MvMode mode = config.mv_mode;
  const bool use_ov = mode != MvMode::kFull;
  const bool use_rv = mode != MvMode::kNone;
  const bool use_mv = mode == MvMode::kL2 || mode == MvMode::kKl;
  const auto& gold = example.ov.labels;

  JointLoss loss;
  ViewForward ov;
  ViewForward rv;
  CrfGradient g_ov;
  CrfGradient g_rv;
  if (use_ov) {
    ov = RunView(params, example.ov, transition_mask);
    g_ov = CrfNllWithGradient(ov.scores, gold);
    loss.l_text = g_ov.value;
  }
  if (use_rv) {
    rv = RunView(params, example.rv, transition_mask);
    g_rv = CrfNllWithGradient(rv.scores, gold);
    loss.l_retrieval = g_rv.value;
  }

  Tensor d_ov_reps;
  Tensor d_rv_reps;
  if (mode == MvMode::kL2) {
    const L2Consistency l2 =
        ConsistencyL2(ov.word_reps, rv.word_reps, config.l2_stop_gradient);
    loss.l_mv = l2.value;
    if (grads) {
      d_ov_reps = (scale * config.mv_weight) * l2.grad_ov;
      if (!config.l2_stop_gradient) {
        d_rv_reps = (scale * config.mv_weight) * l2.grad_rv;
      }
    }
  } else if (mode == MvMode::kKl) {
    const KlConsistency kl =
        ConsistencyKl(Marginals(rv.scores), Marginals(ov.scores));
    loss.l_mv = kl.value;
    if (grads) {
      const CrfGradient gk = BackpropLogMarginals(ov.scores, kl.grad_log_q);
      g_ov.emissions += config.mv_weight * gk.emissions;
      g_ov.transitions += config.mv_weight * gk.transitions;
    }
  }
  loss.total = loss.l_text + loss.l_retrieval +
               (use_mv ? config.mv_weight * loss.l_mv : 0.0);

  if (grads) {
    if (use_ov) {
      BackwardView(params, example.ov, ov, d_ov_reps, scale * g_ov.emissions,
                   scale * g_ov.transitions, grads);
    }
    if (use_rv) {
      BackwardView(params, example.rv, rv, d_rv_reps, scale * g_rv.emissions,
                   scale * g_rv.transitions, grads);
    }
  }
  return loss;
}

double GroupLearningRate(const TrainConfig& config, ParamGroup group) {
  return group == ParamGroup::kCrf ? config.encoder_lr * config.crf_lr_ratio
                                   : config.encoder_lr;
}

namespace {

std::string NormReport(const ModelParams& params) {
  std::ostringstream out;
  for (const auto& t : params.Tensors()) {
    out << " " << t.name << "=" << t.value->norm();
  }
  return out.str();
}

}  // namespace

JointLoss JointStep(ModelParams* params, MomentumSgd* optimizer,
                    const std::vector<const TrainingExample*>& batch,
                    const TrainConfig& config, const Tensor& transition_mask) {
  ModelParams grads = params->ZerosLike();
  JointLoss sum;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const TrainingExample* ex : batch) {
    const JointLoss l =
        ComputeJointLoss(*params, *ex, config, transition_mask, &grads, scale);
    sum.l_text += l.l_text;
    sum.l_retrieval += l.l_retrieval;
    sum.l_mv += l.l_mv;
    sum.total += l.total;
  }
  double sq = 0.0;
  for (const auto& t : grads.Tensors()) sq += t.value->squaredNorm();
  if (!std::isfinite(sum.total) || !std::isfinite(sq)) {
    throw DivergenceError("non-finite loss or gradient (loss " +
                          std::to_string(sum.total) + "); parameter norms:" +
                          NormReport(*params));
  }
  const double norm = std::sqrt(sq);
  if (config.clip_norm > 0.0 && norm > config.clip_norm) {
    const double f = config.clip_norm / norm;
    for (const auto& t : grads.Tensors()) *t.value *= f;
  }
  optimizer->Step(params->Tensors(), std::as_const(grads).Tensors(),
                  [&](ParamGroup g) { return GroupLearningRate(config, g); });
  return sum;
}

std::vector<int> PredictIndices(const ModelParams& params,
                                const TrainingExample& example, View view,
                                const Tensor& transition_mask) {
  const ViewBatch& b = view == View::kOriginal ? example.ov : example.rv;
  return Viterbi(RunView(params, b, transition_mask).scores);
}

std::vector<std::vector<std::string>> Predict(
    const ModelParams& params, const std::vector<TrainingExample>& examples,
    View view, const LabelSet& labels) {
  const Tensor mask = BioTransitionMask(labels);
  std::vector<std::vector<std::string>> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    out.push_back(labels.Decode(PredictIndices(params, ex, view, mask)));
  }
  return out;
}

double ViewF1(const ModelParams& params,
              const std::vector<TrainingExample>& examples, View view,
              const LabelSet& labels) {
  std::vector<std::vector<std::string>> gold;
  for (const auto& ex : examples) gold.push_back(labels.Decode(ex.ov.labels));
  return EntityF1(Predict(params, examples, view, labels), gold).f1;
}

std::string EpochMetrics::ToJson() const {
  nlohmann::json j = {{"epoch", epoch},         {"L_text", l_text},
                      {"L_retrieval", l_retrieval}, {"L_MV", l_mv},
                      {"dev_f1_ov", dev_f1_ov}, {"dev_f1_rv", dev_f1_rv}};
  return j.dump();
}

TrainResult Train(const std::vector<TrainingExample>& train,
                  const std::vector<TrainingExample>& dev,
                  const LabelSet& labels, const TrainConfig& config,
                  std::uint64_t seed,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
  if (train.empty()) throw DataError("training set is empty");
  config.Validate();
  EncoderConfig enc = config.encoder;
  enc.seed = seed;
  ModelParams params = ModelParams::Init(enc, static_cast<int>(labels.size()));
  MomentumSgd optimizer;
  const Tensor mask = BioTransitionMask(labels);

  TrainResult result;
  result.best_dev_f1 = -1.0;
  std::vector<std::size_t> order(train.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.Index(i)]);
    }
    EpochMetrics m;
    m.epoch = epoch;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      std::vector<const TrainingExample*> batch;
      for (std::size_t i = start;
           i < std::min(order.size(), start + config.batch_size); ++i) {
        batch.push_back(&train[order[i]]);
      }
      const JointLoss l = JointStep(&params, &optimizer, batch, config, mask);
      m.l_text += l.l_text;
      m.l_retrieval += l.l_retrieval;
      m.l_mv += l.l_mv;
    }
    m.l_text /= train.size();
    m.l_retrieval /= train.size();
    m.l_mv /= train.size();
    if (!dev.empty()) {
      m.dev_f1_ov = ViewF1(params, dev, View::kOriginal, labels);
      m.dev_f1_rv = ViewF1(params, dev, View::kRetrieval, labels);
    }
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);
    const double score = dev.empty() ? static_cast<double>(epoch)
                         : config.deployed_view() == View::kOriginal
                             ? m.dev_f1_ov
                             : m.dev_f1_rv;
    if (score > result.best_dev_f1) {
      result.best_dev_f1 = score;
      result.best_epoch = epoch;
      result.params = params;
    }
  }
  if (dev.empty()) result.best_dev_f1 = 0.0;
  return result;
}

GradCheckResult GradCheck(const std::function<double()>& loss,
                          const std::vector<TensorRef>& params,
                          const std::vector<ConstTensorRef>& analytic,
                          double eps, std::size_t per_group,
                          std::uint64_t seed) {
  if (params.size() != analytic.size()) {
    throw ConfigError("grad check: parameter/gradient count mismatch");
  }
  if (!(eps > 0.0)) throw ConfigError("grad check: eps must be > 0");
  struct Slot {
    double* value;
    double grad;
  };
  std::map<ParamGroup, std::vector<Slot>> groups;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& p = *params[t].value;
    const Tensor& g = *analytic[t].value;
    if (p.rows() != g.rows() || p.cols() != g.cols()) {
      throw ConfigError("grad check: shape mismatch for " + params[t].name);
    }
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      groups[params[t].group].push_back({p.data() + i, g.data()[i]});
    }
  }
  GradCheckResult result;
  Rng rng(seed);
  for (auto& [group, slots] : groups) {
    const std::size_t take = std::min(per_group, slots.size());
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(slots[i], slots[i + rng.Index(slots.size() - i)]);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < take; ++i) {
      double* x = slots[i].value;
      const double saved = *x;
      *x = saved + eps;
      const double up = loss();
      *x = saved - eps;
      const double down = loss();
      *x = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = slots[i].grad;
      const double denom =
          std::max({std::abs(a), std::abs(numeric), 1e-4});
      const double err = std::abs(a - numeric) / denom;
      worst = std::isnan(err) ? INFINITY : std::max(worst, err);
    }
    result.group_error[group] = worst;
    result.group_coordinates[group] = take;
    result.coordinates += take;
    result.max_rel_error = std::max(result.max_rel_error, worst);
  }
  return result;
}

}  // namespace robner
