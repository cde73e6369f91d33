/*
 * Copyright 2026 The catforest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "support/oracles.h"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace catforest::testing {
namespace {

double Sse(const Dataset& d, std::span<const std::uint32_t> rows) {
  double mean = 0.0;
  for (std::uint32_t r : rows) mean += d.response(r);
  mean /= static_cast<double>(rows.size());
  double sse = 0.0;
  for (std::uint32_t r : rows) sse += (d.response(r) - mean) * (d.response(r) - mean);
  return sse;
}

double GiniOf(const Dataset& d, std::span<const std::uint32_t> rows) {
  std::vector<double> counts(d.num_classes(), 0.0);
  for (std::uint32_t r : rows) counts[d.class_of(r)] += 1.0;
  double g = 0.0;
  for (double c : counts) {
    const double pi = c / static_cast<double>(rows.size());
    g += pi * (1.0 - pi);
  }
  return g;
}

}  // namespace

double DirectObjective(const Dataset& d, std::span<const std::uint32_t> left_rows,
                       std::span<const std::uint32_t> right_rows) {
  if (left_rows.empty() || right_rows.empty()) throw std::logic_error("empty daughter");
  if (d.task() == Task::kRegression) return Sse(d, left_rows) + Sse(d, right_rows);
  const double nl = static_cast<double>(left_rows.size());
  const double nr = static_cast<double>(right_rows.size());
  return (nl * GiniOf(d, left_rows) + nr * GiniOf(d, right_rows)) / (nl + nr);
}

std::optional<OracleSplit> BruteForceCategoricalSplit(const Dataset& d,
                                                      std::span<const std::uint32_t> mother,
                                                      std::size_t p) {
  std::vector<std::uint32_t> present;
  {
    std::set<std::uint32_t> seen;
    for (std::uint32_t r : mother) seen.insert(d.level(p, r));
    present.assign(seen.begin(), seen.end());
  }
  if (present.size() < 2) return std::nullopt;
  std::optional<OracleSplit> best;
  // Fix the last present level on the right so each bipartition is seen once.
  const std::uint64_t count = 1ULL << (present.size() - 1);
  for (std::uint64_t code = 1; code < count; ++code) {
    std::vector<bool> left(d.column_schema(p).num_levels(), false);
    for (std::size_t i = 0; i + 1 < present.size(); ++i) {
      if ((code >> i) & 1ULL) left[present[i]] = true;
    }
    std::vector<std::uint32_t> lr, rr;
    for (std::uint32_t r : mother) (left[d.level(p, r)] ? lr : rr).push_back(r);
    const double obj = DirectObjective(d, lr, rr);
    if (!best || obj < best->objective) best = OracleSplit{obj, left};
  }
  return best;
}

std::optional<double> BruteForceOrderedObjective(const Dataset& d,
                                                 std::span<const std::uint32_t> mother,
                                                 std::size_t p) {
  std::set<double> values;
  for (std::uint32_t r : mother) values.insert(d.ordered_value(p, r));
  std::optional<double> best;
  for (double t : values) {
    std::vector<std::uint32_t> lr, rr;
    for (std::uint32_t r : mother) (d.ordered_value(p, r) <= t ? lr : rr).push_back(r);
    if (rr.empty()) continue;
    const double obj = DirectObjective(d, lr, rr);
    if (!best || obj < *best) best = obj;
  }
  return best;
}

double PairwiseAuc(std::span<const double> scores, std::span<const std::uint32_t> labels,
                   std::uint32_t positive) {
  double credit = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != positive) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == positive) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) credit += 1.0;
      if (scores[i] == scores[j]) credit += 0.5;
    }
  }
  return credit / pairs;
}

double StepSumAveragePrecision(std::span<const double> scores,
                               std::span<const std::uint32_t> labels,
                               std::uint32_t positive) {
  std::vector<double> thresholds(scores.begin(), scores.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double total_pos = 0.0;
  for (std::uint32_t y : labels) total_pos += y == positive ? 1.0 : 0.0;
  double previous_recall = 0.0;
  double ap = 0.0;
  for (double t : thresholds) {
    double tp = 0.0;
    double flagged = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        flagged += 1.0;
        if (labels[i] == positive) tp += 1.0;
      }
    }
    const double recall = tp / total_pos;
    ap += (recall - previous_recall) * (tp / flagged);
    previous_recall = recall;
  }
  return ap;
}

double ConfusionKappa(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                      std::uint32_t num_classes) {
  std::vector<std::vector<double>> m(num_classes, std::vector<double>(num_classes, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) m[a[i]][b[i]] += 1.0;
  const double n = static_cast<double>(a.size());
  double diag = 0.0;
  double chance = 0.0;
  for (std::uint32_t k = 0; k < num_classes; ++k) {
    diag += m[k][k];
    double row = 0.0;
    double col = 0.0;
    for (std::uint32_t j = 0; j < num_classes; ++j) {
      row += m[k][j];
      col += m[j][k];
    }
    chance += row * col;
  }
  const double o = diag / n;
  const double e = chance / (n * n);
  if (e == 1.0) return 1.0;
  return (o - e) / (1.0 - e);
}

}  // namespace catforest::testing
