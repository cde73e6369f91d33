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

#ifndef CATFOREST_METRICS_H_
#define CATFOREST_METRICS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "catforest/policy.h"

namespace catforest {

enum class Orientation { kLowerBetter, kHigherBetter };

// Missing-data heuristics used as the reference set for relative metrics.
inline constexpr std::array<Heuristic, 4> kDefaultBaseline = {
    Heuristic::kStop, Heuristic::kMajority, Heuristic::kRandom, Heuristic::kDbi};

// Throws std::invalid_argument on a length mismatch or empty input.
double Rmse(std::span<const double> truth, std::span<const double> predictions);

// (x - best) / best where best is the min (lower-better) or max (higher-better)
// over `baseline`. Throws std::invalid_argument when a baseline member has no
// value and ComputeError when best is 0.
std::map<Heuristic, double> RelativeToBest(const std::map<Heuristic, double>& values,
                                           std::span<const Heuristic> baseline,
                                           Orientation orientation);

// First member of `baseline` (in the order given) attaining the best value.
Heuristic BestMember(const std::map<Heuristic, double>& values,
                     std::span<const Heuristic> baseline, Orientation orientation);

// (o - e) / (1 - e) over 0-based classes below `num_classes`; 1 when e = 1.
double CohenKappa(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                  std::uint32_t num_classes);

// Mann-Whitney AUC with half credit for ties. Throws std::invalid_argument
// unless both the positive class and some other class are present.
double RocAuc(std::span<const double> scores, std::span<const std::uint32_t> labels,
              std::uint32_t positive);

// Average precision: sum over descending score groups of
// (recall gain) x (precision at the end of the group).
double PrAuc(std::span<const double> scores, std::span<const std::uint32_t> labels,
             std::uint32_t positive);

// -(1/N) sum log(clip(p[n][y_n], eps, 1 - eps)). Rows must have one entry per
// class in [0, 1] summing to 1 within 1e-9.
double LogLoss(std::span<const std::vector<double>> probabilities,
               std::span<const std::uint32_t> truth, double epsilon);

// Sample quantile, R type 7. Throws std::invalid_argument on empty input or
// p outside [0, 1].
double Quantile(std::span<const double> values, double p);

struct SummaryStats {
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

SummaryStats Summarize(std::span<const double> values);

struct DifferenceBucket {
  double lower = 0.0;  // absence proportion range [lower, upper); the last
  double upper = 0.0;  // bucket also holds 1
  std::size_t count = 0;
  double mean = 0.0;   // NaN when count == 0
  double lo95 = 0.0;   // 2.5th percentile
  double hi95 = 0.0;   // 97.5th percentile
  bool excludes_zero = false;
};

// Differences first[r][n] - second[r][n] taken within each replication r and
// bucketed by the absence proportion of observation n. NaN values (undefined
// predictions or proportions) are skipped. Throws std::invalid_argument on
// ragged inputs or a bucket width outside (0, 1].
std::vector<DifferenceBucket> PairedDifferenceSummary(
    const std::vector<std::vector<double>>& first,
    const std::vector<std::vector<double>>& second, std::span<const double> absence,
    double bucket_width);

}  // namespace catforest

#endif  // CATFOREST_METRICS_H_
