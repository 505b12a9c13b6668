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

#ifndef ROBNER_EVAL_H_
#define ROBNER_EVAL_H_

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "robner/align.h"
#include "robner/corpus.h"

namespace robner {

struct EntitySpan {
  std::string type;
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive

  auto operator<=>(const EntitySpan&) const = default;
};

// Maximal B-T (I-T)* runs, ordered by start. Throws DataError on invalid BIO.
std::vector<EntitySpan> ExtractSpans(const std::vector<std::string>& labels);

// Inverse of ExtractSpans for non-overlapping spans.
std::vector<std::string> SpansToLabels(const std::vector<EntitySpan>& spans,
                                       std::size_t length);

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t true_positives = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

// Micro-averaged exact span+type match over the whole corpus.
PrfScore EntityF1(const std::vector<std::vector<std::string>>& predicted,
                  const std::vector<std::vector<std::string>>& gold);
PrfScore EntityF1(const Dataset& predicted, const Dataset& gold);

struct CorrectionStats {
  std::size_t ent = 0;
  std::size_t ent_true = 0;
  double ent_rate = 0.0;  // percent
  std::size_t token = 0;
  std::size_t token_true = 0;
  double token_rate = 0.0;  // percent
};

// A gold token survives when exactly one noisy token aligns to it alone and
// is byte-identical to it. ent_true counts gold entities whose tokens all
// survive; token counts gold tokens.
CorrectionStats ComputeCorrectionStats(
    const Dataset& gold, const Dataset& noisy,
    const std::vector<EditAlignment>& alignments);

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t runs = 0;

  // "mean±std" with fixed decimals.
  std::string Format(int decimals = 2) const;
};

Aggregate AggregateRuns(const std::vector<double>& values);

std::map<std::string, Aggregate> AggregateMetrics(
    const std::vector<std::map<std::string, double>>& runs);

// One line of the OV/RV comparison table.
struct ReportRow {
  std::string setting;
  Aggregate ov;
  Aggregate rv;
};

std::string FormatReportTable(const std::vector<ReportRow>& rows,
                              int decimals = 2);
std::string ReportToJson(const std::vector<ReportRow>& rows);

}  // namespace robner

#endif  // ROBNER_EVAL_H_
