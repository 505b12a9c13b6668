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

#include "cli.h"

#include <exception>
#include <functional>

#include "CLI11.hpp"
#include "robner/error.h"
#include "stages.h"

namespace robner::cli {

namespace {

void AddForce(CLI::App* cmd, bool* force) {
  cmd->add_flag("--force", *force, "Rebuild outputs that already exist");
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Noise-robust NER pipeline", "robner"};
  app.require_subcommand(1);
  Io io{out, err};
  std::function<int()> run;

  NoiseOptions noise;
  auto* c = app.add_subcommand("noise", "Corrupt a CoNLL corpus with typos or OCR-like noise");
  c->add_option("--mode", noise.mode, "typos or ocr")->capture_default_str();
  c->add_option("--p", noise.p, "Typo noise level in [0,1]")->capture_default_str();
  c->add_option("--level", noise.level, "OCR preset level 1..4")->capture_default_str();
  c->add_option("--seed", noise.seed)->capture_default_str();
  c->add_option("--confusion", noise.confusion, "OCR confusion table (TSV)");
  c->add_option("--in", noise.in)->required();
  c->add_option("--out", noise.out)->required();
  AddForce(c, &noise.force);
  c->callback([&] { run = [&] { return RunNoise(noise, io); }; });

  AlignOptions align;
  c = app.add_subcommand("align", "Project gold labels onto noisy tokens");
  c->add_option("--gold", align.gold)->required();
  c->add_option("--noisy", align.noisy)->required();
  c->add_option("--out", align.out)->required();
  c->add_option("--stats", align.stats, "Write correction statistics (JSON)");
  AddForce(c, &align.force);
  c->callback([&] { run = [&] { return RunAlign(align, io); }; });

  IndexOptions index;
  c = app.add_subcommand("index", "Build a BM25 index over a knowledge corpus");
  c->add_option("--knowledge", index.knowledge)->required();
  c->add_option("--out", index.out)->required();
  c->add_option("--k1", index.k1)->capture_default_str();
  c->add_option("--b", index.b)->capture_default_str();
  AddForce(c, &index.force);
  c->callback([&] { run = [&] { return RunIndex(index, io); }; });

  RetrieveOptions retrieve;
  c = app.add_subcommand("retrieve", "Write per-sentence contexts (bm25, gold or none)");
  c->add_option("--backend", retrieve.backend)->capture_default_str();
  c->add_option("--index", retrieve.index);
  c->add_option("--gold", retrieve.gold);
  c->add_option("--queries", retrieve.queries)->required();
  c->add_option("--out", retrieve.out)->required();
  c->add_option("--mode", retrieve.mode, "para, sent or sent-link")->capture_default_str();
  c->add_option("--top-m", retrieve.top_m)->capture_default_str();
  AddForce(c, &retrieve.force);
  c->callback([&] { run = [&] { return RunRetrieve(retrieve, io); }; });

  DenseOptions dense;
  c = app.add_subcommand("dense", "Dense retrieval with an optional contrastive encoder");
  c->add_option("--knowledge", dense.knowledge)->required();
  c->add_option("--queries", dense.queries)->required();
  c->add_option("--out", dense.out)->required();
  c->add_option("--pairs-noisy", dense.pairs_noisy);
  c->add_option("--pairs-gold", dense.pairs_gold);
  c->add_option("--mode", dense.mode)->capture_default_str();
  c->add_option("--top-m", dense.top_m)->capture_default_str();
  c->add_option("--epochs", dense.epochs)->capture_default_str();
  c->add_option("--d-model", dense.d_model)->capture_default_str();
  c->add_option("--pca", dense.pca, "Reduce to this many dimensions")->capture_default_str();
  c->add_option("--ivf", dense.ivf, "IVF centroids; 0 searches exactly")->capture_default_str();
  c->add_option("--nprobe", dense.nprobe)->capture_default_str();
  c->add_option("--seed", dense.seed)->capture_default_str();
  AddForce(c, &dense.force);
  c->callback([&] { run = [&] { return RunDense(dense, io); }; });

  SelfRetrieveOptions self;
  c = app.add_subcommand("self-retrieve", "Retrieve similar training sentences by BERTScore");
  c->add_option("--store", self.store)->required();
  c->add_option("--queries", self.queries)->required();
  c->add_option("--out", self.out)->required();
  c->add_option("--model", self.model, "Checkpoint whose encoder embeds tokens");
  c->add_option("--top-m", self.top_m)->capture_default_str();
  c->add_option("--d-model", self.d_model)->capture_default_str();
  c->add_option("--seed", self.seed)->capture_default_str();
  AddForce(c, &self.force);
  c->callback([&] { run = [&] { return RunSelfRetrieve(self, io); }; });

  TrainOptions train;
  c = app.add_subcommand("train", "Train one model per seed");
  c->add_option("--config", train.config, "INI file with [train], [encoder], [retrieval]");
  c->add_option("--train", train.train)->required();
  c->add_option("--dev", train.dev)->required();
  c->add_option("--train-contexts", train.train_contexts);
  c->add_option("--dev-contexts", train.dev_contexts);
  c->add_option("--out", train.out)->required();
  c->add_option("--seed", train.seeds, "Override the configured seeds");
  c->add_option("--min-freq", train.min_freq, "Vocabulary frequency threshold")->capture_default_str();
  AddForce(c, &train.force);
  c->callback([&] { run = [&] { return RunTrain(train, io); }; });

  EvalOptions eval;
  c = app.add_subcommand("eval", "Entity F1 of predictions or of a trained model");
  c->add_option("--gold", eval.gold)->required();
  c->add_option("--pred", eval.pred);
  c->add_option("--model", eval.model);
  c->add_option("--contexts", eval.contexts);
  c->add_option("--view", eval.view, "ov, rv or deployed")->capture_default_str();
  c->add_option("--out", eval.out, "Write predictions (CoNLL)");
  c->add_option("--json", eval.json, "Write metrics (JSON)");
  c->add_option("--setting", eval.setting, "Setting name recorded in the metrics");
  AddForce(c, &eval.force);
  c->callback([&] { run = [&] { return RunEval(eval, io); }; });

  ReportOptions report;
  c = app.add_subcommand("report", "Aggregate metrics files into a mean±std table");
  c->add_option("metrics", report.metrics)->required();
  c->add_option("--json", report.json);
  c->add_option("--decimals", report.decimals)->capture_default_str();
  c->callback([&] { run = [&] { return RunReport(report, io); }; });

  SynthOptions synth;
  c = app.add_subcommand("synth", "Generate the synthetic NER corpus and knowledge base");
  c->add_option("--out-dir", synth.out_dir)->required();
  c->add_option("--sentences", synth.sentences)->capture_default_str();
  c->add_option("--seed", synth.seed)->capture_default_str();
  AddForce(c, &synth.force);
  c->callback([&] { run = [&] { return RunSynth(synth, io); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (!run) {
      err << "error: no subcommand given\n";
      return kExitConfig;
    }
    return run();
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; every other parse failure is a usage error.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DivergenceError& e) {
    err << "training diverged: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace robner::cli
