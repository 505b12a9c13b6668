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

#include "robner/neural.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "binary_io.h"
#include "robner/error.h"
#include "robner/rng.h"

namespace robner {

namespace {

constexpr double kLayerNormEps = 1e-5;

Tensor Zeros(Eigen::Index r, Eigen::Index c) { return Tensor::Zero(r, c); }

Tensor Gaussian(Eigen::Index r, Eigen::Index c, double stddev, Rng& rng) {
  Tensor t(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) t(i, j) = stddev * rng.Normal();
  }
  return t;
}

Tensor Xavier(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(fan_in, fan_out);
  for (Eigen::Index i = 0; i < fan_in; ++i) {
    for (Eigen::Index j = 0; j < fan_out; ++j) {
      t(i, j) = limit * (2.0 * rng.Uniform() - 1.0);
    }
  }
  return t;
}

// y = xhat * gain + bias with xhat the row-standardized input.
Tensor LayerNorm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                 Tensor* xhat, Eigen::VectorXd* rstd) {
  const Eigen::Index d = x.cols();
  xhat->resize(x.rows(), d);
  rstd->resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    const double r = 1.0 / std::sqrt(var + kLayerNormEps);
    (*rstd)(i) = r;
    xhat->row(i) = (x.row(i).array() - mean) * r;
  }
  Tensor y = xhat->array().rowwise() * gain.row(0).array();
  y.rowwise() += bias.row(0);
  return y;
}

Tensor LayerNormBackward(const Tensor& dy, const Tensor& xhat,
                         const Eigen::VectorXd& rstd, const Tensor& gain,
                         Tensor* dgain, Tensor* dbias) {
  *dgain += (dy.array() * xhat.array()).colwise().sum().matrix();
  *dbias += dy.colwise().sum();
  const Tensor dxhat = dy.array().rowwise() * gain.row(0).array();
  Tensor dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double m1 = dxhat.row(i).mean();
    const double m2 = (dxhat.row(i).array() * xhat.row(i).array()).mean();
    dx.row(i) =
        rstd(i) * (dxhat.row(i).array() - m1 - xhat.row(i).array() * m2);
  }
  return dx;
}

double Gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double GeluGrad(double x) {
  static const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);
  return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))) +
         x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

Tensor AddRow(Tensor m, const Tensor& row) {
  m.rowwise() += row.row(0);
  return m;
}

template <typename Ref, typename Layer>
void AppendLayerRefs(std::vector<Ref>& out, int l, Layer& p) {
  const std::string pre = "layer" + std::to_string(l) + ".";
  auto add = [&](const char* name, ParamGroup g, auto& t) {
    out.push_back(Ref{pre + name, g, &t});
  };
  add("ln1_gain", ParamGroup::kLayerNorm, p.ln1_gain);
  add("ln1_bias", ParamGroup::kLayerNorm, p.ln1_bias);
  add("wq", ParamGroup::kAttention, p.wq);
  add("bq", ParamGroup::kAttention, p.bq);
  add("wk", ParamGroup::kAttention, p.wk);
  add("bk", ParamGroup::kAttention, p.bk);
  add("wv", ParamGroup::kAttention, p.wv);
  add("bv", ParamGroup::kAttention, p.bv);
  add("wo", ParamGroup::kAttention, p.wo);
  add("bo", ParamGroup::kAttention, p.bo);
  add("ln2_gain", ParamGroup::kLayerNorm, p.ln2_gain);
  add("ln2_bias", ParamGroup::kLayerNorm, p.ln2_bias);
  add("w1", ParamGroup::kFeedForward, p.w1);
  add("b1", ParamGroup::kFeedForward, p.b1);
  add("w2", ParamGroup::kFeedForward, p.w2);
  add("b2", ParamGroup::kFeedForward, p.b2);
}

template <typename Ref, typename Enc>
std::vector<Ref> EncoderRefs(Enc& e) {
  std::vector<Ref> out;
  out.push_back(Ref{"token_embedding", ParamGroup::kEmbedding, &e.token_embedding});
  out.push_back(
      Ref{"position_embedding", ParamGroup::kEmbedding, &e.position_embedding});
  for (std::size_t l = 0; l < e.layers.size(); ++l) {
    AppendLayerRefs<Ref>(out, static_cast<int>(l), e.layers[l]);
  }
  return out;
}

template <typename Ref, typename Model>
std::vector<Ref> ModelRefs(Model& m) {
  std::vector<Ref> out = EncoderRefs<Ref>(m.encoder);
  out.push_back(Ref{"crf.emission_weight", ParamGroup::kCrf, &m.crf.emission_weight});
  out.push_back(Ref{"crf.emission_bias", ParamGroup::kCrf, &m.crf.emission_bias});
  out.push_back(Ref{"crf.transitions", ParamGroup::kCrf, &m.crf.transitions});
  return out;
}

}  // namespace

std::string_view ParamGroupName(ParamGroup group) {
  switch (group) {
    case ParamGroup::kEmbedding:
      return "embedding";
    case ParamGroup::kAttention:
      return "attention";
    case ParamGroup::kFeedForward:
      return "feedforward";
    case ParamGroup::kLayerNorm:
      return "layernorm";
    case ParamGroup::kCrf:
      return "crf";
  }
  return "?";
}

void EncoderConfig::Validate() const {
  if (d_model < 1 || n_heads < 1 || d_model % n_heads != 0) {
    throw ConfigError("d_model must be a positive multiple of n_heads");
  }
  if (n_layers < 0 || d_ff < 1 || max_len < 2 || vocab_size < 2) {
    throw ConfigError("invalid encoder configuration");
  }
}

EncoderParams EncoderParams::Init(const EncoderConfig& config) {
  config.Validate();
  Rng rng(config.seed);
  const int d = config.d_model;
  EncoderParams p;
  p.config = config;
  p.token_embedding = Gaussian(config.vocab_size, d, 0.3, rng);
  p.position_embedding = Gaussian(config.max_len, d, 0.3, rng);
  for (int l = 0; l < config.n_layers; ++l) {
    LayerParams lp;
    lp.ln1_gain = Tensor::Ones(1, d);
    lp.ln1_bias = Zeros(1, d);
    lp.wq = Xavier(d, d, rng);
    lp.bq = Zeros(1, d);
    lp.wk = Xavier(d, d, rng);
    lp.bk = Zeros(1, d);
    lp.wv = Xavier(d, d, rng);
    lp.bv = Zeros(1, d);
    lp.wo = Xavier(d, d, rng);
    lp.bo = Zeros(1, d);
    lp.ln2_gain = Tensor::Ones(1, d);
    lp.ln2_bias = Zeros(1, d);
    lp.w1 = Xavier(d, config.d_ff, rng);
    lp.b1 = Zeros(1, config.d_ff);
    lp.w2 = Xavier(config.d_ff, d, rng);
    lp.b2 = Zeros(1, d);
    p.layers.push_back(std::move(lp));
  }
  return p;
}

EncoderParams EncoderParams::ZerosLike() const {
  EncoderParams z = *this;
  for (auto& r : z.Tensors()) r.value->setZero();
  return z;
}

std::vector<TensorRef> EncoderParams::Tensors() {
  return EncoderRefs<TensorRef>(*this);
}

std::vector<ConstTensorRef> EncoderParams::Tensors() const {
  return EncoderRefs<ConstTensorRef>(*this);
}

ModelParams ModelParams::Init(const EncoderConfig& config, int num_labels) {
  if (num_labels < 1) throw ConfigError("num_labels must be >= 1");
  ModelParams p;
  p.encoder = EncoderParams::Init(config);
  Rng rng(DeriveSeed(config.seed, 0x637266));
  p.crf.emission_weight = Xavier(config.d_model, num_labels, rng);
  p.crf.emission_bias = Zeros(1, num_labels);
  p.crf.transitions = Zeros(num_labels + 2, num_labels + 2);
  return p;
}

ModelParams ModelParams::ZerosLike() const {
  ModelParams z = *this;
  for (auto& r : z.Tensors()) r.value->setZero();
  return z;
}

std::vector<TensorRef> ModelParams::Tensors() {
  return ModelRefs<TensorRef>(*this);
}

std::vector<ConstTensorRef> ModelParams::Tensors() const {
  return ModelRefs<ConstTensorRef>(*this);
}

ViewBatch ConcatViews(const std::vector<std::string>& noisy_tokens,
                      const std::vector<std::string>& context_words,
                      const Vocabulary& vocab, std::size_t budget) {
  ViewBatch b;
  for (const SubtokenSpan& span : vocab.TokenizeSentence(noisy_tokens)) {
    b.word_spans.emplace_back(static_cast<int>(b.input_ids.size()),
                              static_cast<int>(span.subtoken_ids.size()));
    for (std::size_t k = 0; k < span.subtoken_ids.size(); ++k) {
      b.input_ids.push_back(span.subtoken_ids[k]);
      b.crf_mask.push_back(k == 0);
    }
  }
  if (b.input_ids.size() + 1 > budget) {
    throw DataError("noisy sentence needs " +
                    std::to_string(b.input_ids.size()) +
                    " subtokens plus a separator; budget is " +
                    std::to_string(budget));
  }
  std::vector<int> context;
  const std::size_t room = budget - b.input_ids.size() - 1;
  for (const auto& w : context_words) {
    if (context.size() >= room) break;
    for (int id : vocab.Tokenize(w).subtoken_ids) {
      if (context.size() >= room) break;
      context.push_back(id);
    }
  }
  if (!context.empty()) {
    b.separator_pos = static_cast<int>(b.input_ids.size());
    b.input_ids.push_back(vocab.sep_id());
    b.crf_mask.push_back(false);
    for (int id : context) {
      b.input_ids.push_back(id);
      b.crf_mask.push_back(false);
    }
  }
  return b;
}

EncoderOutput Encode(const EncoderParams& params, const std::vector<int>& ids) {
  const auto& cfg = params.config;
  const Eigen::Index n = static_cast<Eigen::Index>(ids.size());
  if (n == 0) throw DataError("cannot encode an empty sequence");
  if (n > cfg.max_len) {
    throw DataError("sequence of " + std::to_string(n) +
                    " positions exceeds max_len " + std::to_string(cfg.max_len));
  }
  const int d = cfg.d_model;
  const int dh = d / cfg.n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  EncoderOutput out;
  Tensor x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int id = ids[i];
    if (id < 0 || id >= params.token_embedding.rows()) {
      throw DataError("token id out of vocabulary range");
    }
    x.row(i) = params.token_embedding.row(id) + params.position_embedding.row(i);
  }
  out.hidden.push_back(x);

  for (const LayerParams& p : params.layers) {
    LayerCache c;
    c.x_in = x;
    c.h1 = LayerNorm(x, p.ln1_gain, p.ln1_bias, &c.xhat1, &c.rstd1);
    c.q = AddRow(c.h1 * p.wq, p.bq);
    c.k = AddRow(c.h1 * p.wk, p.bk);
    c.v = AddRow(c.h1 * p.wv, p.bv);
    c.concat.resize(n, d);
    for (int h = 0; h < cfg.n_heads; ++h) {
      Tensor s = c.q.middleCols(h * dh, dh) * c.k.middleCols(h * dh, dh).transpose();
      s *= scale;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double m = s.row(i).maxCoeff();
        s.row(i) = (s.row(i).array() - m).exp().matrix();
        s.row(i) /= s.row(i).sum();
      }
      c.concat.middleCols(h * dh, dh) = s * c.v.middleCols(h * dh, dh);
      c.attention.push_back(std::move(s));
    }
    c.x_mid = x + AddRow(c.concat * p.wo, p.bo);
    c.h2 = LayerNorm(c.x_mid, p.ln2_gain, p.ln2_bias, &c.xhat2, &c.rstd2);
    c.u = AddRow(c.h2 * p.w1, p.b1);
    c.g = c.u.unaryExpr([](double v) { return Gelu(v); });
    x = c.x_mid + AddRow(c.g * p.w2, p.b2);
    out.hidden.push_back(x);
    out.layers.push_back(std::move(c));
  }
  return out;
}

void EncodeBackward(const EncoderParams& params, const std::vector<int>& ids,
                    const EncoderOutput& out,
                    const std::vector<Tensor>& grad_hidden,
                    EncoderParams* grads) {
  const auto& cfg = params.config;
  const Eigen::Index n = static_cast<Eigen::Index>(ids.size());
  const int d = cfg.d_model;
  const int dh = d / cfg.n_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const int layers = static_cast<int>(params.layers.size());

  auto grad_at = [&](int l) -> const Tensor* {
    if (l < static_cast<int>(grad_hidden.size()) && grad_hidden[l].size() > 0) {
      return &grad_hidden[l];
    }
    return nullptr;
  };

  Tensor dx = Zeros(n, d);
  if (const Tensor* g = grad_at(layers)) dx += *g;

  for (int l = layers - 1; l >= 0; --l) {
    const LayerParams& p = params.layers[l];
    const LayerCache& c = out.layers[l];
    LayerParams& gp = grads->layers[l];

    // Feed-forward sublayer.
    gp.w2 += c.g.transpose() * dx;
    gp.b2 += dx.colwise().sum();
    Tensor du = dx * p.w2.transpose();
    du.array() *= c.u.unaryExpr([](double v) { return GeluGrad(v); }).array();
    gp.w1 += c.h2.transpose() * du;
    gp.b1 += du.colwise().sum();
    const Tensor dh2 = du * p.w1.transpose();
    Tensor dx_mid = dx + LayerNormBackward(dh2, c.xhat2, c.rstd2, p.ln2_gain,
                                           &gp.ln2_gain, &gp.ln2_bias);

    // Attention sublayer.
    gp.wo += c.concat.transpose() * dx_mid;
    gp.bo += dx_mid.colwise().sum();
    const Tensor dconcat = dx_mid * p.wo.transpose();
    Tensor dq = Zeros(n, d);
    Tensor dk = Zeros(n, d);
    Tensor dv = Zeros(n, d);
    for (int h = 0; h < cfg.n_heads; ++h) {
      const Tensor& a = c.attention[h];
      const auto d_o = dconcat.middleCols(h * dh, dh);
      const Tensor da = d_o * c.v.middleCols(h * dh, dh).transpose();
      dv.middleCols(h * dh, dh) = a.transpose() * d_o;
      Tensor ds = a.array() * da.array();
      const Eigen::VectorXd row = ds.rowwise().sum();
      ds -= (a.array().colwise() * row.array()).matrix();
      ds *= scale;
      dq.middleCols(h * dh, dh) = ds * c.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh) = ds.transpose() * c.q.middleCols(h * dh, dh);
    }
    gp.wq += c.h1.transpose() * dq;
    gp.bq += dq.colwise().sum();
    gp.wk += c.h1.transpose() * dk;
    gp.bk += dk.colwise().sum();
    gp.wv += c.h1.transpose() * dv;
    gp.bv += dv.colwise().sum();
    const Tensor dh1 =
        dq * p.wq.transpose() + dk * p.wk.transpose() + dv * p.wv.transpose();
    dx = dx_mid + LayerNormBackward(dh1, c.xhat1, c.rstd1, p.ln1_gain,
                                    &gp.ln1_gain, &gp.ln1_bias);
    if (const Tensor* g = grad_at(l)) dx += *g;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    grads->token_embedding.row(ids[i]) += dx.row(i);
    grads->position_embedding.row(i) += dx.row(i);
  }
}

Tensor FirstPool(const Tensor& reps, const ViewBatch& batch) {
  Tensor out(static_cast<Eigen::Index>(batch.word_spans.size()), reps.cols());
  for (std::size_t w = 0; w < batch.word_spans.size(); ++w) {
    out.row(w) = reps.row(batch.word_spans[w].first);
  }
  return out;
}

void FirstPoolBackward(const Tensor& grad_words, const ViewBatch& batch,
                       Tensor* grad_reps) {
  for (std::size_t w = 0; w < batch.word_spans.size(); ++w) {
    grad_reps->row(batch.word_spans[w].first) += grad_words.row(w);
  }
}

ViewForward RunView(const ModelParams& params, const ViewBatch& batch,
                    const Tensor& transition_mask) {
  ViewForward f;
  f.encoder = Encode(params.encoder, batch.input_ids);
  f.word_reps = FirstPool(f.encoder.last(), batch);
  f.scores.emissions =
      AddRow(f.word_reps * params.crf.emission_weight, params.crf.emission_bias);
  f.scores.transitions = params.crf.transitions + transition_mask;
  return f;
}

void BackwardView(const ModelParams& params, const ViewBatch& batch,
                  const ViewForward& forward, const Tensor& grad_word_reps,
                  const Tensor& grad_emissions, const Tensor& grad_transitions,
                  ModelParams* grads) {
  const Eigen::Index n = forward.word_reps.rows();
  const Eigen::Index d = forward.word_reps.cols();
  Tensor d_words = grad_word_reps.size() > 0 ? grad_word_reps : Zeros(n, d);
  if (grad_emissions.size() > 0) {
    grads->crf.emission_weight += forward.word_reps.transpose() * grad_emissions;
    grads->crf.emission_bias += grad_emissions.colwise().sum();
    d_words += grad_emissions * params.crf.emission_weight.transpose();
  }
  if (grad_transitions.size() > 0) {
    // Masked (-inf) entries never lie on a finite path; their gradient is 0.
    for (Eigen::Index i = 0; i < grad_transitions.rows(); ++i) {
      for (Eigen::Index j = 0; j < grad_transitions.cols(); ++j) {
        if (std::isfinite(forward.scores.transitions(i, j))) {
          grads->crf.transitions(i, j) += grad_transitions(i, j);
        }
      }
    }
  }
  Tensor d_reps = Zeros(static_cast<Eigen::Index>(batch.length()), d);
  FirstPoolBackward(d_words, batch, &d_reps);
  std::vector<Tensor> grad_hidden(params.encoder.layers.size() + 1);
  grad_hidden.back() = std::move(d_reps);
  EncodeBackward(params.encoder, batch.input_ids, forward.encoder, grad_hidden,
                 &grads->encoder);
}

void MomentumSgd::Step(const std::vector<TensorRef>& params,
                       const std::vector<ConstTensorRef>& grads,
                       const std::function<double(ParamGroup)>& learning_rate) {
  if (params.size() != grads.size()) {
    throw ConfigError("optimizer: parameter/gradient count mismatch");
  }
  if (velocity_.empty()) {
    for (const auto& p : params) {
      velocity_.push_back(Tensor::Zero(p.value->rows(), p.value->cols()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& v = velocity_[i];
    v = momentum_ * v + *grads[i].value;
    const double lr = learning_rate(params[i].group);
    if (lr != 0.0) *params[i].value -= lr * v;
  }
}

using binio::GetF64;
using binio::GetU32;
using binio::PutF64;
using binio::PutU32;

std::string SerializeEncoderConfig(const EncoderConfig& c, int num_labels) {
  std::ostringstream out;
  out << "d_model=" << c.d_model << "\n"
      << "n_layers=" << c.n_layers << "\n"
      << "n_heads=" << c.n_heads << "\n"
      << "d_ff=" << c.d_ff << "\n"
      << "max_len=" << c.max_len << "\n"
      << "vocab_size=" << c.vocab_size << "\n"
      << "num_labels=" << num_labels << "\n"
      << "seed=" << c.seed << "\n";
  return out.str();
}

EncoderConfig ParseEncoderConfig(std::string_view text, int* num_labels) {
  EncoderConfig c;
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("config line without '='");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError(std::string("config missing ") + key);
    return it->second;
  };
  try {
    c.d_model = std::stoi(get("d_model"));
    c.n_layers = std::stoi(get("n_layers"));
    c.n_heads = std::stoi(get("n_heads"));
    c.d_ff = std::stoi(get("d_ff"));
    c.max_len = std::stoi(get("max_len"));
    c.vocab_size = std::stoi(get("vocab_size"));
    c.seed = std::stoull(get("seed"));
    if (num_labels != nullptr) *num_labels = std::stoi(get("num_labels"));
  } catch (const std::invalid_argument&) {
    throw DataError("malformed encoder config value");
  } catch (const std::out_of_range&) {
    throw DataError("encoder config value out of range");
  }
  return c;
}

void SaveCheckpoint(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  const auto tensors = params.Tensors();
  out.write("RNCK", 4);
  PutU32(out, 1);
  PutU32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    PutU32(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    PutU32(out, static_cast<std::uint32_t>(t.value->rows()));
    PutU32(out, static_cast<std::uint32_t>(t.value->cols()));
    for (Eigen::Index i = 0; i < t.value->rows(); ++i) {
      for (Eigen::Index j = 0; j < t.value->cols(); ++j) {
        PutF64(out, (*t.value)(i, j));
      }
    }
  }
  std::ofstream cfg(path + ".cfg", std::ios::binary);
  if (!cfg) throw DataError("cannot write " + path + ".cfg");
  cfg << SerializeEncoderConfig(params.encoder.config, params.num_labels());
}

ModelParams LoadCheckpoint(const std::string& path) {
  std::ifstream cfg_in(path + ".cfg", std::ios::binary);
  if (!cfg_in) throw DataError("cannot open " + path + ".cfg");
  std::ostringstream cfg_text;
  cfg_text << cfg_in.rdbuf();
  int num_labels = 0;
  const EncoderConfig cfg = ParseEncoderConfig(cfg_text.str(), &num_labels);
  ModelParams params = ModelParams::Init(cfg, num_labels).ZerosLike();

  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "RNCK", 4) != 0) {
    throw DataError(path + ": not a checkpoint");
  }
  if (GetU32(in) != 1) throw DataError(path + ": unsupported version");
  const std::uint32_t count = GetU32(in);
  std::map<std::string, Tensor*> by_name;
  for (auto& t : params.Tensors()) by_name[t.name] = t.value;
  if (count != by_name.size()) throw DataError(path + ": tensor count mismatch");
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t len = GetU32(in);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw DataError("checkpoint truncated");
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError(path + ": unknown tensor " + name);
    const std::uint32_t rows = GetU32(in);
    const std::uint32_t cols = GetU32(in);
    Tensor& t = *it->second;
    if (rows != t.rows() || cols != t.cols()) {
      throw DataError(path + ": shape mismatch for " + name);
    }
    for (std::uint32_t i = 0; i < rows; ++i) {
      for (std::uint32_t j = 0; j < cols; ++j) t(i, j) = GetF64(in);
    }
  }
  return params;
}

}  // namespace robner
