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

#include "robner/crf.h"

#include <cmath>
#include <limits>

#include "robner/error.h"

namespace robner {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) with -inf as the identity.
class LogSumExp {
 public:
  void Add(double v) {
    if (v == kNegInf) return;
    if (v <= max_) {
      sum_ += std::exp(v - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - v) + 1.0;
      max_ = v;
    }
  }
  double Value() const {
    return max_ == kNegInf ? kNegInf : max_ + std::log(sum_);
  }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

void CheckShapes(const CrfScores& s) {
  if (s.length() < 1) throw DataError("CRF needs at least one position");
  if (s.transitions.rows() != s.num_labels() + 2 ||
      s.transitions.cols() != s.num_labels() + 2) {
    throw DataError("CRF transition matrix must be (K+2)x(K+2)");
  }
}

}  // namespace

Eigen::MatrixXd BioTransitionMask(const LabelSet& labels) {
  const int k = static_cast<int>(labels.size());
  const int bos = k;
  const int eos = k + 1;
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(k + 2, k + 2);
  for (int from = 0; from < k + 2; ++from) {
    for (int to = 0; to < k + 2; ++to) {
      bool ok;
      if (to == bos || from == eos || (from == bos && to == eos)) {
        ok = false;
      } else if (to == eos) {
        ok = true;
      } else {
        ok = labels.Allowed(from == bos ? -1 : from, to);
      }
      if (!ok) mask(from, to) = kNegInf;
    }
  }
  return mask;
}

ForwardBackward RunForwardBackward(const CrfScores& scores) {
  CheckShapes(scores);
  const int n = scores.length();
  const int k = scores.num_labels();
  const auto& e = scores.emissions;
  const auto& t = scores.transitions;
  ForwardBackward fb;
  fb.alpha.resize(n, k);
  fb.beta.resize(n, k);
  for (int y = 0; y < k; ++y) fb.alpha(0, y) = t(scores.bos(), y) + e(0, y);
  for (int i = 1; i < n; ++i) {
    for (int y = 0; y < k; ++y) {
      LogSumExp acc;
      for (int a = 0; a < k; ++a) acc.Add(fb.alpha(i - 1, a) + t(a, y));
      fb.alpha(i, y) = e(i, y) + acc.Value();
    }
  }
  for (int y = 0; y < k; ++y) fb.beta(n - 1, y) = t(y, scores.eos());
  for (int i = n - 2; i >= 0; --i) {
    for (int y = 0; y < k; ++y) {
      LogSumExp acc;
      for (int b = 0; b < k; ++b) {
        acc.Add(t(y, b) + e(i + 1, b) + fb.beta(i + 1, b));
      }
      fb.beta(i, y) = acc.Value();
    }
  }
  LogSumExp z;
  for (int y = 0; y < k; ++y) z.Add(fb.alpha(n - 1, y) + fb.beta(n - 1, y));
  fb.log_z = z.Value();
  if (!std::isfinite(fb.log_z)) {
    throw DataError("CRF has no finite-scoring label path");
  }
  return fb;
}

double LogPartition(const CrfScores& scores) {
  return RunForwardBackward(scores).log_z;
}

double PathScore(const CrfScores& scores, const std::vector<int>& labels) {
  CheckShapes(scores);
  if (static_cast<int>(labels.size()) != scores.length()) {
    throw DataError("label path length differs from CRF length");
  }
  const auto& t = scores.transitions;
  double s = 0.0;
  int prev = scores.bos();
  for (int i = 0; i < scores.length(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= scores.num_labels()) {
      throw DataError("label index out of range");
    }
    s += t(prev, y) + scores.emissions(i, y);
    prev = y;
  }
  return s + t(prev, scores.eos());
}

double CrfNll(const CrfScores& scores, const std::vector<int>& gold) {
  const double path = PathScore(scores, gold);
  if (std::isnan(path)) throw DivergenceError("CRF scores are not finite");
  if (!std::isfinite(path)) {
    throw DataError("gold labels use a forbidden transition");
  }
  return LogPartition(scores) - path;
}

Eigen::MatrixXd Marginals(const CrfScores& scores) {
  const ForwardBackward fb = RunForwardBackward(scores);
  Eigen::MatrixXd q(scores.length(), scores.num_labels());
  for (int i = 0; i < q.rows(); ++i) {
    for (int y = 0; y < q.cols(); ++y) {
      q(i, y) = std::exp(fb.alpha(i, y) + fb.beta(i, y) - fb.log_z);
    }
  }
  return q;
}

std::vector<int> Viterbi(const CrfScores& scores) {
  CheckShapes(scores);
  const int n = scores.length();
  const int k = scores.num_labels();
  const auto& e = scores.emissions;
  const auto& t = scores.transitions;
  // best[i, y]: best score of positions i..n-1 plus EOS given y_i = y.
  Eigen::MatrixXd best(n, k);
  for (int y = 0; y < k; ++y) best(n - 1, y) = e(n - 1, y) + t(y, scores.eos());
  for (int i = n - 2; i >= 0; --i) {
    for (int y = 0; y < k; ++y) {
      double m = kNegInf;
      for (int b = 0; b < k; ++b) m = std::max(m, t(y, b) + best(i + 1, b));
      best(i, y) = e(i, y) + m;
    }
  }
  // Greedy forward pass choosing the smallest optimal label keeps the path
  // optimal and makes it the lexicographically smallest optimum.
  std::vector<int> path(n);
  int prev = scores.bos();
  for (int i = 0; i < n; ++i) {
    double m = kNegInf;
    for (int y = 0; y < k; ++y) m = std::max(m, t(prev, y) + best(i, y));
    if (m == kNegInf) throw DataError("CRF has no finite-scoring label path");
    int pick = 0;
    while (t(prev, pick) + best(i, pick) != m) ++pick;
    path[i] = pick;
    prev = pick;
  }
  return path;
}

CrfGradient CrfNllWithGradient(const CrfScores& scores,
                               const std::vector<int>& gold) {
  const double path = PathScore(scores, gold);
  if (std::isnan(path)) throw DivergenceError("CRF scores are not finite");
  if (!std::isfinite(path)) {
    throw DataError("gold labels use a forbidden transition");
  }
  const ForwardBackward fb = RunForwardBackward(scores);
  const int n = scores.length();
  const int k = scores.num_labels();
  const auto& e = scores.emissions;
  const auto& t = scores.transitions;

  CrfGradient g;
  g.value = fb.log_z - path;
  g.emissions.resize(n, k);
  g.transitions = Eigen::MatrixXd::Zero(k + 2, k + 2);
  for (int i = 0; i < n; ++i) {
    for (int y = 0; y < k; ++y) {
      g.emissions(i, y) = std::exp(fb.alpha(i, y) + fb.beta(i, y) - fb.log_z);
    }
  }
  for (int y = 0; y < k; ++y) {
    g.transitions(scores.bos(), y) += g.emissions(0, y);
    g.transitions(y, scores.eos()) += g.emissions(n - 1, y);
  }
  for (int i = 1; i < n; ++i) {
    for (int a = 0; a < k; ++a) {
      if (fb.alpha(i - 1, a) == kNegInf) continue;
      for (int b = 0; b < k; ++b) {
        const double lp =
            fb.alpha(i - 1, a) + t(a, b) + e(i, b) + fb.beta(i, b) - fb.log_z;
        if (lp != kNegInf) g.transitions(a, b) += std::exp(lp);
      }
    }
  }
  int prev = scores.bos();
  for (int i = 0; i < n; ++i) {
    g.emissions(i, gold[i]) -= 1.0;
    g.transitions(prev, gold[i]) -= 1.0;
    prev = gold[i];
  }
  g.transitions(prev, scores.eos()) -= 1.0;
  return g;
}

CrfGradient BackpropLogMarginals(const CrfScores& scores,
                                 const Eigen::MatrixXd& grad_log_marginals) {
  const ForwardBackward fb = RunForwardBackward(scores);
  const int n = scores.length();
  const int k = scores.num_labels();
  const auto& e = scores.emissions;
  const auto& t = scores.transitions;
  if (grad_log_marginals.rows() != n || grad_log_marginals.cols() != k) {
    throw DataError("marginal gradient shape mismatch");
  }

  CrfGradient g;
  g.emissions = Eigen::MatrixXd::Zero(n, k);
  g.transitions = Eigen::MatrixXd::Zero(k + 2, k + 2);
  Eigen::MatrixXd ga = Eigen::MatrixXd::Zero(n, k);
  Eigen::MatrixXd gb = Eigen::MatrixXd::Zero(n, k);

  // log q_i(y) = alpha_i(y) + beta_i(y) - log Z.
  double g_log_z = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int y = 0; y < k; ++y) {
      if (fb.alpha(i, y) + fb.beta(i, y) == kNegInf) continue;
      ga(i, y) += grad_log_marginals(i, y);
      gb(i, y) += grad_log_marginals(i, y);
      g_log_z -= grad_log_marginals(i, y);
    }
  }
  // log Z = LSE_y(alpha_{n-1}(y) + beta_{n-1}(y)).
  for (int y = 0; y < k; ++y) {
    const double lp = fb.alpha(n - 1, y) + fb.beta(n - 1, y) - fb.log_z;
    if (lp == kNegInf) continue;
    const double w = std::exp(lp);
    ga(n - 1, y) += g_log_z * w;
    gb(n - 1, y) += g_log_z * w;
  }

  // beta_i(y) = LSE_b(T[y,b] + E[i+1,b] + beta_{i+1}(b)); beta_i feeds
  // beta_{i-1}, so adjoints flow from i = 0 upward.
  for (int i = 0; i + 1 < n; ++i) {
    for (int y = 0; y < k; ++y) {
      const double up = gb(i, y);
      if (up == 0.0 || fb.beta(i, y) == kNegInf) continue;
      for (int b = 0; b < k; ++b) {
        const double lp = t(y, b) + e(i + 1, b) + fb.beta(i + 1, b);
        if (lp == kNegInf) continue;
        const double w = up * std::exp(lp - fb.beta(i, y));
        g.transitions(y, b) += w;
        g.emissions(i + 1, b) += w;
        gb(i + 1, b) += w;
      }
    }
  }
  for (int y = 0; y < k; ++y) g.transitions(y, scores.eos()) += gb(n - 1, y);

  // alpha_i(y) = E[i,y] + LSE_a(alpha_{i-1}(a) + T[a,y]).
  for (int i = n - 1; i >= 1; --i) {
    for (int y = 0; y < k; ++y) {
      const double up = ga(i, y);
      if (up == 0.0 || fb.alpha(i, y) == kNegInf) continue;
      g.emissions(i, y) += up;
      const double inner = fb.alpha(i, y) - e(i, y);
      for (int a = 0; a < k; ++a) {
        const double lp = fb.alpha(i - 1, a) + t(a, y);
        if (lp == kNegInf) continue;
        const double w = up * std::exp(lp - inner);
        ga(i - 1, a) += w;
        g.transitions(a, y) += w;
      }
    }
  }
  for (int y = 0; y < k; ++y) {
    g.transitions(scores.bos(), y) += ga(0, y);
    g.emissions(0, y) += ga(0, y);
  }
  return g;
}

}  // namespace robner
