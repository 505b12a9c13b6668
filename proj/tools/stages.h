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

#ifndef ROBNER_TOOLS_STAGES_H_
#define ROBNER_TOOLS_STAGES_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace robner::cli {

struct Io {
  std::ostream& out;
  std::ostream& err;
};

struct NoiseOptions {
  std::string mode = "typos";  // typos | ocr
  double p = 0.2;
  int level = 2;
  std::uint64_t seed = 1;
  std::string confusion;  // optional table file
  std::string in, out;
  bool force = false;
};

struct AlignOptions {
  std::string gold, noisy, out, stats;
  bool force = false;
};

struct IndexOptions {
  std::string knowledge, out;
  double k1 = 1.2;
  double b = 0.75;
  bool force = false;
};

struct RetrieveOptions {
  std::string backend = "bm25";  // bm25 | gold | none
  std::string index, gold, queries, out;
  std::string mode = "sent";
  int top_m = 10;
  bool force = false;
};

struct DenseOptions {
  std::string knowledge, queries, out;
  std::string pairs_noisy, pairs_gold;  // optional contrastive training data
  std::string mode = "sent";
  int top_m = 10;
  int epochs = 3;
  int d_model = 32;
  int pca = 0;     // 0 keeps the full dimension
  int ivf = 0;     // centroids; 0 means exact search
  int nprobe = 8;
  std::uint64_t seed = 1;
  bool force = false;
};

struct SelfRetrieveOptions {
  std::string store, queries, out, model;
  int top_m = 10;
  int d_model = 32;
  std::uint64_t seed = 1;
  bool force = false;
};

struct TrainOptions {
  std::string config, train, dev, train_contexts, dev_contexts, out;
  std::vector<std::uint64_t> seeds;  // overrides the config when nonempty
  // Words seen fewer times fall back to characters; 2 keeps one-off typos
  // out of the vocabulary.
  int min_freq = 2;
  bool force = false;
};

struct EvalOptions {
  std::string pred, gold, model, contexts, out, json, setting;
  std::string view = "deployed";  // ov | rv | deployed
  bool force = false;
};

struct ReportOptions {
  std::vector<std::string> metrics;
  std::string json;
  int decimals = 2;
};

struct SynthOptions {
  std::string out_dir;
  std::size_t sentences = 500;
  std::uint64_t seed = 1;
  bool force = false;
};

int RunNoise(const NoiseOptions& o, Io io);
int RunAlign(const AlignOptions& o, Io io);
int RunIndex(const IndexOptions& o, Io io);
int RunRetrieve(const RetrieveOptions& o, Io io);
int RunDense(const DenseOptions& o, Io io);
int RunSelfRetrieve(const SelfRetrieveOptions& o, Io io);
int RunTrain(const TrainOptions& o, Io io);
int RunEval(const EvalOptions& o, Io io);
int RunReport(const ReportOptions& o, Io io);
int RunSynth(const SynthOptions& o, Io io);

}  // namespace robner::cli

#endif  // ROBNER_TOOLS_STAGES_H_
