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

// Linear-chain CRF inference in log space.
//
// A path y_0..y_{n-1} scores
//   T[BOS, y_0] + sum_i E[i, y_i] + sum_{i>0} T[y_{i-1}, y_i] + T[y_{n-1}, EOS]
// where E is n x K and T is (K+2) x (K+2) with BOS = K and EOS = K+1.
// Forbidden transitions carry -infinity.

#ifndef ROBNER_CRF_H_
#define ROBNER_CRF_H_

#include <vector>

#include <Eigen/Core>

#include "robner/corpus.h"

namespace robner {

struct CrfScores {
  Eigen::MatrixXd emissions;    // n x K
  Eigen::MatrixXd transitions;  // (K+2) x (K+2), row = from, col = to

  int length() const { return static_cast<int>(emissions.rows()); }
  int num_labels() const { return static_cast<int>(emissions.cols()); }
  int bos() const { return num_labels(); }
  int eos() const { return num_labels() + 1; }
};

// 0 for allowed transitions, -inf otherwise: I-T only after B-T/I-T, nothing
// into BOS, nothing out of EOS, no empty BOS->EOS path.
Eigen::MatrixXd BioTransitionMask(const LabelSet& labels);

struct ForwardBackward {
  Eigen::MatrixXd alpha;  // n x K, includes E[i, .]
  Eigen::MatrixXd beta;   // n x K, excludes E[i, .]
  double log_z = 0.0;
};

// Throws DataError for empty input or when no finite path exists.
ForwardBackward RunForwardBackward(const CrfScores& scores);

double LogPartition(const CrfScores& scores);

// Score of one path; -inf if it uses a forbidden transition.
double PathScore(const CrfScores& scores, const std::vector<int>& labels);

// log Z - score(gold). Throws DataError if gold is not a finite path.
double CrfNll(const CrfScores& scores, const std::vector<int>& gold);

// Position marginals q(y_i) = exp(alpha_i + beta_i - log Z); rows sum to 1.
Eigen::MatrixXd Marginals(const CrfScores& scores);

// Highest scoring path; among equal scores the lexicographically smallest
// label-index sequence. Throws DataError when no finite path exists.
std::vector<int> Viterbi(const CrfScores& scores);

struct CrfGradient {
  double value = 0.0;
  Eigen::MatrixXd emissions;
  Eigen::MatrixXd transitions;
};

// NLL with its exact gradient: d/dE = marginals - onehot(gold), d/dT =
// expected transition counts - gold transition counts.
CrfGradient CrfNllWithGradient(const CrfScores& scores,
                               const std::vector<int>& gold);

// Reverse-mode pass through the forward-backward recursions: given
// G = d f / d log q (n x K), returns d f / dE and d f / dT. Entries of G on
// states with zero marginal are ignored.
CrfGradient BackpropLogMarginals(const CrfScores& scores,
                                 const Eigen::MatrixXd& grad_log_marginals);

}  // namespace robner

#endif  // ROBNER_CRF_H_
