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

#include "catforest/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "catforest/errors.h"

namespace catforest {
namespace {

void RequireSameLength(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
  if (a == 0) throw std::invalid_argument(std::string(what) + ": empty input");
}

double BaselineBest(const std::map<Heuristic, double>& values,
                    std::span<const Heuristic> baseline, Orientation orientation) {
  if (baseline.empty()) throw std::invalid_argument("baseline set is empty");
  double best = 0.0;
  bool first = true;
  for (Heuristic h : baseline) {
    auto it = values.find(h);
    if (it == values.end()) {
      throw std::invalid_argument("no value for baseline heuristic '" +
                                  std::string(HeuristicName(h)) + "'");
    }
    const double v = it->second;
    if (first || (orientation == Orientation::kLowerBetter ? v < best : v > best)) {
      best = v;
      first = false;
    }
  }
  return best;
}

struct LabelCounts {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

LabelCounts CountLabels(std::span<const double> scores,
                        std::span<const std::uint32_t> labels, std::uint32_t positive,
                        const char* what) {
  RequireSameLength(scores.size(), labels.size(), what);
  LabelCounts c;
  for (std::uint32_t y : labels) (y == positive ? c.positives : c.negatives)++;
  return c;
}

// Indices sorted by descending score; ties keep input order.
std::vector<std::size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double Rmse(std::span<const double> truth, std::span<const double> predictions) {
  RequireSameLength(truth.size(), predictions.size(), "Rmse");
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = predictions[i] - truth[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

std::map<Heuristic, double> RelativeToBest(const std::map<Heuristic, double>& values,
                                           std::span<const Heuristic> baseline,
                                           Orientation orientation) {
  const double best = BaselineBest(values, baseline, orientation);
  if (best == 0.0) {
    throw ComputeError("relative metric undefined: best baseline value is 0");
  }
  std::map<Heuristic, double> out;
  for (const auto& [h, v] : values) out[h] = (v - best) / best;
  return out;
}

Heuristic BestMember(const std::map<Heuristic, double>& values,
                     std::span<const Heuristic> baseline, Orientation orientation) {
  const double best = BaselineBest(values, baseline, orientation);
  for (Heuristic h : baseline) {
    if (values.at(h) == best) return h;
  }
  return baseline.front();
}

double CohenKappa(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                  std::uint32_t num_classes) {
  RequireSameLength(a.size(), b.size(), "CohenKappa");
  std::vector<double> ca(num_classes, 0.0);
  std::vector<double> cb(num_classes, 0.0);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= num_classes || b[i] >= num_classes) {
      throw std::invalid_argument("CohenKappa: class index out of range");
    }
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    if (a[i] == b[i]) ++agree;
  }
  const double n = static_cast<double>(a.size());
  const double observed = static_cast<double>(agree) / n;
  double chance = 0.0;
  for (std::uint32_t k = 0; k < num_classes; ++k) chance += (ca[k] / n) * (cb[k] / n);
  if (chance >= 1.0) return 1.0;
  return (observed - chance) / (1.0 - chance);
}

double RocAuc(std::span<const double> scores, std::span<const std::uint32_t> labels,
              std::uint32_t positive) {
  const LabelCounts c = CountLabels(scores, labels, positive, "RocAuc");
  if (c.positives == 0 || c.negatives == 0) {
    throw std::invalid_argument("RocAuc: both classes must be present");
  }
  // Mid-ranks of the ascending scores give half credit to ties.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == positive) positive_rank_sum += mid_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(c.positives);
  const double q = static_cast<double>(c.negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

double PrAuc(std::span<const double> scores, std::span<const std::uint32_t> labels,
             std::uint32_t positive) {
  const LabelCounts c = CountLabels(scores, labels, positive, "PrAuc");
  if (c.positives == 0) throw std::invalid_argument("PrAuc: no positive labels");
  const std::vector<std::size_t> order = DescendingOrder(scores);
  const double total_positives = static_cast<double>(c.positives);
  double true_pos = 0.0;
  double flagged = 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double group_pos = 0.0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == positive) group_pos += 1.0;
      ++j;
    }
    true_pos += group_pos;
    flagged += static_cast<double>(j - i);
    area += (group_pos / total_positives) * (true_pos / flagged);
    i = j;
  }
  return area;
}

double LogLoss(std::span<const std::vector<double>> probabilities,
               std::span<const std::uint32_t> truth, double epsilon) {
  RequireSameLength(probabilities.size(), truth.size(), "LogLoss");
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("LogLoss: epsilon must be in (0, 0.5)");
  }
  const std::size_t k = probabilities.front().size();
  double sum = 0.0;
  for (std::size_t n = 0; n < truth.size(); ++n) {
    const std::vector<double>& row = probabilities[n];
    if (row.size() != k || truth[n] >= k) {
      throw std::invalid_argument("LogLoss: malformed probability row " +
                                  std::to_string(n));
    }
    double total = 0.0;
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("LogLoss: probability outside [0, 1] in row " +
                                    std::to_string(n));
      }
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("LogLoss: row " + std::to_string(n) +
                                  " does not sum to 1");
    }
    sum += std::log(std::clamp(row[truth[n]], epsilon, 1.0 - epsilon));
  }
  return -sum / static_cast<double>(truth.size());
}

double Quantile(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("Quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("Quantile: p outside [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

SummaryStats Summarize(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("Summarize: empty input");
  SummaryStats s;
  s.count = values.size();
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  s.q1 = Quantile(values, 0.25);
  s.median = Quantile(values, 0.5);
  s.q3 = Quantile(values, 0.75);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  return s;
}

std::vector<DifferenceBucket> PairedDifferenceSummary(
    const std::vector<std::vector<double>>& first,
    const std::vector<std::vector<double>>& second, std::span<const double> absence,
    double bucket_width) {
  if (!(bucket_width > 0.0 && bucket_width <= 1.0)) {
    throw std::invalid_argument("PairedDifferenceSummary: bucket width outside (0, 1]");
  }
  if (first.size() != second.size()) {
    throw std::invalid_argument("PairedDifferenceSummary: replication counts differ");
  }
  const auto num_buckets =
      static_cast<std::size_t>(std::ceil(1.0 / bucket_width - 1e-9));
  std::vector<std::vector<double>> diffs(num_buckets);
  for (std::size_t r = 0; r < first.size(); ++r) {
    if (first[r].size() != absence.size() || second[r].size() != absence.size()) {
      throw std::invalid_argument("PairedDifferenceSummary: observation counts differ");
    }
    for (std::size_t n = 0; n < absence.size(); ++n) {
      const double a = absence[n];
      const double d = first[r][n] - second[r][n];
      if (std::isnan(a) || std::isnan(d)) continue;
      const auto bucket = std::min(
          num_buckets - 1, static_cast<std::size_t>(std::floor(a / bucket_width + 1e-9)));
      diffs[bucket].push_back(d);
    }
  }
  std::vector<DifferenceBucket> out(num_buckets);
  for (std::size_t i = 0; i < num_buckets; ++i) {
    DifferenceBucket& b = out[i];
    b.lower = static_cast<double>(i) * bucket_width;
    b.upper = std::min(1.0, static_cast<double>(i + 1) * bucket_width);
    b.count = diffs[i].size();
    if (b.count == 0) {
      b.mean = b.lo95 = b.hi95 = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    b.mean = std::accumulate(diffs[i].begin(), diffs[i].end(), 0.0) /
             static_cast<double>(b.count);
    b.lo95 = Quantile(diffs[i], 0.025);
    b.hi95 = Quantile(diffs[i], 0.975);
    b.excludes_zero = b.lo95 > 0.0 || b.hi95 < 0.0;
  }
  return out;
}

}  // namespace catforest
