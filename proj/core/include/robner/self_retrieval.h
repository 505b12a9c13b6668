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

#ifndef ROBNER_SELF_RETRIEVAL_H_
#define ROBNER_SELF_RETRIEVAL_H_

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "robner/corpus.h"
#include "robner/neural.h"

namespace robner {

struct TokenEmbeddingSet {
  std::string id;
  Eigen::MatrixXd tokens;  // n x d, unit rows
};

// Last-layer encoder output at each word's first subtoken, rows normalized.
TokenEmbeddingSet EmbedTokens(const EncoderParams& params,
                              const Vocabulary& vocab,
                              const std::vector<std::string>& words,
                              std::string id);

struct BertScoreResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Greedy matching with cosine similarity; negative cosines count as 0.
BertScoreResult BertScore(const TokenEmbeddingSet& candidate,
                          const TokenEmbeddingSet& reference);

struct SelfHit {
  std::size_t index = 0;  // position in the store
  std::string id;
  double f1 = 0.0;
};

// Exhaustive BERTScore F1 ranking, F1 desc then store position asc. Store
// entries whose id equals the query id are skipped.
std::vector<SelfHit> SelfRetrieve(const TokenEmbeddingSet& query,
                                  const std::vector<TokenEmbeddingSet>& store,
                                  std::size_t k);

// An embedding store with one row per token (ids are row numbers) followed
// by "SIDX", u64 sentence count and, per sentence, u64 first row, u64 row
// count, u32 id length and the id bytes.
void SaveTokenStore(const std::string& path,
                    const std::vector<TokenEmbeddingSet>& sets);
std::vector<TokenEmbeddingSet> LoadTokenStore(const std::string& path);

}  // namespace robner

#endif  // ROBNER_SELF_RETRIEVAL_H_
