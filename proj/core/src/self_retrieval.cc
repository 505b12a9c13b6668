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

#include "robner/self_retrieval.h"

#include <algorithm>
#include <fstream>

#include "binary_io.h"
#include "robner/dense.h"
#include "robner/error.h"

namespace robner {

TokenEmbeddingSet EmbedTokens(const EncoderParams& params,
                              const Vocabulary& vocab,
                              const std::vector<std::string>& words,
                              std::string id) {
  if (words.empty()) throw DataError("cannot embed an empty sentence");
  std::vector<int> ids;
  std::vector<int> firsts;
  for (const auto& span : vocab.TokenizeSentence(words)) {
    if (static_cast<int>(ids.size()) >= params.config.max_len) break;
    firsts.push_back(static_cast<int>(ids.size()));
    for (int t : span.subtoken_ids) {
      if (static_cast<int>(ids.size()) >= params.config.max_len) break;
      ids.push_back(t);
    }
  }
  const EncoderOutput out = Encode(params, ids);
  TokenEmbeddingSet set;
  set.id = std::move(id);
  set.tokens.resize(static_cast<Eigen::Index>(firsts.size()), out.last().cols());
  for (std::size_t w = 0; w < firsts.size(); ++w) {
    const auto row = out.last().row(firsts[w]);
    const double n = row.norm();
    if (!(n > 0.0)) throw DataError("token embedding has zero norm");
    set.tokens.row(w) = row / n;
  }
  return set;
}

BertScoreResult BertScore(const TokenEmbeddingSet& candidate,
                          const TokenEmbeddingSet& reference) {
  const Eigen::MatrixXd& c = candidate.tokens;
  const Eigen::MatrixXd& r = reference.tokens;
  if (c.rows() == 0 || r.rows() == 0) throw DataError("BERTScore needs tokens");
  if (c.cols() != r.cols()) throw DataError("BERTScore dimension mismatch");
  const Eigen::VectorXd cn = c.rowwise().norm();
  const Eigen::VectorXd rn = r.rowwise().norm();
  Eigen::MatrixXd sim = c * r.transpose();
  for (Eigen::Index i = 0; i < sim.rows(); ++i) {
    for (Eigen::Index j = 0; j < sim.cols(); ++j) {
      sim(i, j) = std::max(0.0, sim(i, j) / (cn(i) * rn(j)));
    }
  }
  BertScoreResult s;
  s.precision = sim.rowwise().maxCoeff().mean();
  s.recall = sim.colwise().maxCoeff().mean();
  const double d = s.precision + s.recall;
  s.f1 = d > 0.0 ? 2.0 * s.precision * s.recall / d : 0.0;
  return s;
}

std::vector<SelfHit> SelfRetrieve(const TokenEmbeddingSet& query,
                                  const std::vector<TokenEmbeddingSet>& store,
                                  std::size_t k) {
  if (store.empty()) throw DataError("self-retrieval store is empty");
  std::vector<SelfHit> hits;
  if (k == 0) return hits;
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (store[i].id == query.id) continue;
    hits.push_back({i, store[i].id, BertScore(query, store[i]).f1});
  }
  auto better = [](const SelfHit& a, const SelfHit& b) {
    return a.f1 != b.f1 ? a.f1 > b.f1 : a.index < b.index;
  };
  k = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + k, hits.end(), better);
  hits.resize(k);
  return hits;
}

void SaveTokenStore(const std::string& path,
                    const std::vector<TokenEmbeddingSet>& sets) {
  EmbeddingStore store;
  Eigen::Index rows = 0;
  const Eigen::Index dim = sets.empty() ? 0 : sets.front().tokens.cols();
  for (const auto& s : sets) {
    if (s.tokens.cols() != dim) throw DataError("token store dimension mismatch");
    rows += s.tokens.rows();
  }
  store.vectors.resize(rows, dim);
  Eigen::Index r = 0;
  for (const auto& s : sets) {
    store.vectors.middleRows(r, s.tokens.rows()) = s.tokens.cast<float>();
    for (Eigen::Index i = 0; i < s.tokens.rows(); ++i) store.ids.push_back(r + i);
    r += s.tokens.rows();
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  WriteEmbeddingStore(out, store);
  out.write("SIDX", 4);
  binio::PutU64(out, sets.size());
  r = 0;
  for (const auto& s : sets) {
    binio::PutU64(out, static_cast<std::uint64_t>(r));
    binio::PutU64(out, static_cast<std::uint64_t>(s.tokens.rows()));
    binio::PutU32(out, static_cast<std::uint32_t>(s.id.size()));
    out.write(s.id.data(), static_cast<std::streamsize>(s.id.size()));
    r += s.tokens.rows();
  }
}

std::vector<TokenEmbeddingSet> LoadTokenStore(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  const EmbeddingStore store = ReadEmbeddingStore(in);
  if (!binio::ReadMagic(in, "SIDX")) {
    throw DataError(path + ": missing sentence index section");
  }
  const std::uint64_t n = binio::GetU64(in);
  std::vector<TokenEmbeddingSet> sets;
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::uint64_t start = binio::GetU64(in);
    const std::uint64_t rows = binio::GetU64(in);
    const std::uint32_t len = binio::GetU32(in);
    std::string id(len, '\0');
    if (!in.read(id.data(), len)) throw DataError(path + ": truncated index");
    if (start + rows > store.count() || rows == 0) {
      throw DataError(path + ": sentence index out of range");
    }
    sets.push_back({std::move(id),
                    store.vectors.middleRows(static_cast<Eigen::Index>(start),
                                             static_cast<Eigen::Index>(rows))
                        .cast<double>()});
  }
  return sets;
}

}  // namespace robner
