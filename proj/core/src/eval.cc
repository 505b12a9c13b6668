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

#include "robner/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "robner/error.h"

namespace robner {

std::vector<EntitySpan> ExtractSpans(const std::vector<std::string>& labels) {
  ValidateBio(labels);
  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const BioLabel b = ParseBioLabel(labels[i]);
    if (b.prefix == 'B') {
      spans.push_back({b.type, i, i});
    } else if (b.prefix == 'I') {
      spans.back().end = i;
    }
  }
  return spans;
}

std::vector<std::string> SpansToLabels(const std::vector<EntitySpan>& spans,
                                       std::size_t length) {
  std::vector<std::string> labels(length, std::string(kOutsideLabel));
  for (const auto& s : spans) {
    if (s.start > s.end || s.end >= length) {
      throw DataError("entity span out of range");
    }
    labels[s.start] = "B-" + s.type;
    for (std::size_t i = s.start + 1; i <= s.end; ++i) labels[i] = "I-" + s.type;
  }
  return labels;
}

PrfScore EntityF1(const std::vector<std::vector<std::string>>& predicted,
                  const std::vector<std::vector<std::string>>& gold) {
  if (predicted.size() != gold.size()) {
    throw DataError("prediction and gold sentence counts differ");
  }
  PrfScore s;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predicted[i].size() != gold[i].size()) {
      throw DataError("sentence " + std::to_string(i) +
                      ": prediction and gold lengths differ");
    }
    const auto p = ExtractSpans(predicted[i]);
    const auto g = ExtractSpans(gold[i]);
    const std::set<EntitySpan> gs(g.begin(), g.end());
    for (const auto& span : p) s.true_positives += gs.count(span);
    s.predicted += p.size();
    s.gold += g.size();
  }
  s.precision = s.predicted == 0 ? 0.0 : double(s.true_positives) / s.predicted;
  s.recall = s.gold == 0 ? 0.0 : double(s.true_positives) / s.gold;
  const double denom = s.precision + s.recall;
  s.f1 = denom == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / denom;
  return s;
}

PrfScore EntityF1(const Dataset& predicted, const Dataset& gold) {
  std::vector<std::vector<std::string>> p;
  std::vector<std::vector<std::string>> g;
  for (const auto& s : predicted) p.push_back(s.labels);
  for (const auto& s : gold) g.push_back(s.labels);
  return EntityF1(p, g);
}

CorrectionStats ComputeCorrectionStats(
    const Dataset& gold, const Dataset& noisy,
    const std::vector<EditAlignment>& alignments) {
  if (gold.size() != noisy.size() || gold.size() != alignments.size()) {
    throw DataError("correction stats need aligned corpora");
  }
  CorrectionStats st;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& g = gold[i];
    const auto& n = noisy[i];
    const auto& a = alignments[i];
    if (a.gold_token_count != g.tokens.size() ||
        a.token_map.size() != n.tokens.size()) {
      throw DataError("sentence " + std::to_string(i) +
                      ": alignment does not match the corpora");
    }
    std::vector<bool> survived(g.tokens.size(), false);
    for (std::size_t j = 0; j < n.tokens.size(); ++j) {
      const auto& src = a.token_map[j];
      if (src.size() == 1 && !survived[src[0]] &&
          n.tokens[j] == g.tokens[src[0]]) {
        survived[src[0]] = true;
      }
    }
    st.token += g.tokens.size();
    st.token_true += std::count(survived.begin(), survived.end(), true);
    for (const auto& span : ExtractSpans(g.labels)) {
      ++st.ent;
      bool ok = true;
      for (std::size_t t = span.start; t <= span.end; ++t) ok = ok && survived[t];
      if (ok) ++st.ent_true;
    }
  }
  st.ent_rate = st.ent == 0 ? 0.0 : 100.0 * st.ent_true / st.ent;
  st.token_rate = st.token == 0 ? 0.0 : 100.0 * st.token_true / st.token;
  return st;
}

std::string Aggregate::Format(int decimals) const {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.*f±%.*f", decimals, mean, decimals, stddev);
  return buf;
}

Aggregate AggregateRuns(const std::vector<double>& values) {
  Aggregate a;
  a.runs = values.size();
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / values.size();
  double sq = 0.0;
  for (double v : values) sq += (v - a.mean) * (v - a.mean);
  a.stddev = std::sqrt(sq / values.size());
  return a;
}

std::map<std::string, Aggregate> AggregateMetrics(
    const std::vector<std::map<std::string, double>>& runs) {
  std::map<std::string, std::vector<double>> columns;
  for (const auto& run : runs) {
    for (const auto& [k, v] : run) columns[k].push_back(v);
  }
  std::map<std::string, Aggregate> out;
  for (const auto& [k, vs] : columns) out[k] = AggregateRuns(vs);
  return out;
}

std::string FormatReportTable(const std::vector<ReportRow>& rows,
                              int decimals) {
  std::size_t w0 = std::string("setting").size();
  std::size_t w1 = 2;
  std::size_t w2 = 2;
  for (const auto& r : rows) {
    w0 = std::max(w0, r.setting.size());
    w1 = std::max(w1, r.ov.Format(decimals).size());
    w2 = std::max(w2, r.rv.Format(decimals).size());
  }
  auto pad = [](const std::string& s, std::size_t w) {
    // ± is two bytes but one column.
    std::size_t cols = 0;
    for (unsigned char c : s) cols += (c & 0xC0) != 0x80;
    return s + std::string(w > cols ? w - cols : 0, ' ');
  };
  std::ostringstream out;
  out << pad("setting", w0) << " | " << pad("OV", w1) << " | " << "RV" << "\n";
  out << std::string(w0, '-') << "-+-" << std::string(w1, '-') << "-+-"
      << std::string(w2, '-') << "\n";
  for (const auto& r : rows) {
    out << pad(r.setting, w0) << " | " << pad(r.ov.Format(decimals), w1)
        << " | " << r.rv.Format(decimals) << "\n";
  }
  return out.str();
}

std::string ReportToJson(const std::vector<ReportRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"setting", r.setting},
                 {"ov", {{"mean", r.ov.mean}, {"std", r.ov.stddev}, {"runs", r.ov.runs}}},
                 {"rv", {{"mean", r.rv.mean}, {"std", r.rv.stddev}, {"runs", r.rv.runs}}}});
  }
  return j.dump(2);
}

}  // namespace robner
