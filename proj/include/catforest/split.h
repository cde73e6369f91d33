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

// Impurity measures and split search.
//
// A mother node is passed as a multiset of row indices (bootstrap duplicates
// appear repeatedly and count with multiplicity). All searches scan candidates
// in a fixed order and keep the first candidate whose objective is strictly
// smaller than the best so far; comparisons use exact `<`. The exhaustive
// search's preference for sending absent levels right follows from that rule.

#ifndef CATFOREST_SPLIT_H_
#define CATFOREST_SPLIT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "catforest/dataset.h"
#include "catforest/level_mask.h"
#include "catforest/rng.h"

namespace catforest {

using RowMultiset = std::span<const std::uint32_t>;

enum class SplitKind { kOrdered, kCategorical };
enum class CategoricalMethod { kPseudoValue, kExhaustive, kRandom };

// Arithmetic mean with multiplicity. Throws std::invalid_argument when empty.
double NodeMean(std::span<const double> responses);

// pi_k = count(k) / |node| for 0-based classes. Throws when empty or when a
// class index is >= num_classes.
std::vector<double> ClassProportions(std::span<const std::uint32_t> classes,
                                     std::uint32_t num_classes);

// sum_k pi_k (1 - pi_k). Throws std::invalid_argument unless every entry is in
// [0, 1] and they sum to 1 within 1e-9.
double Gini(std::span<const double> proportions);

// Sufficient statistics of one daughter for SplitObjective.
struct NodeSummary {
  std::uint64_t size = 0;
  double sse = 0.0;                        // regression
  std::vector<std::uint64_t> class_counts;  // classification

  static NodeSummary OfResponses(std::span<const double> responses);
  static NodeSummary OfClasses(std::span<const std::uint32_t> classes,
                               std::uint32_t num_classes);
};

// Regression: SSE(left) + SSE(right). Classification: size-weighted average of
// the daughters' Gini indices. Throws std::invalid_argument on an empty
// daughter.
double SplitObjective(Task task, const NodeSummary& left, const NodeSummary& right);

// Per-level pseudo values of a categorical predictor in one mother node: level
// means (regression) or the share of class 1 (stored as class index 0) for
// binary classification. Values exist only for present levels.
struct GammaTable {
  std::size_t predictor = 0;
  std::vector<double> values;  // size Q; NaN for absent levels
  LevelMask present;
  LevelMask absent;

  double value(std::uint32_t level) const { return values[level]; }
};

struct CandidateSplit {
  std::size_t predictor = 0;
  SplitKind kind = SplitKind::kOrdered;
  double impurity = 0.0;
  std::uint64_t left_size = 0;
  std::uint64_t right_size = 0;

  // kOrdered: x <= threshold goes left.
  double threshold = 0.0;

  // kCategorical.
  CategoricalMethod method = CategoricalMethod::kPseudoValue;
  LevelMask present;      // levels with > 0 training rows in the mother
  LevelMask left_levels;  // present levels sent left
  LevelMask bitmask;      // full encoding over all Q levels
  std::optional<GammaTable> gamma;      // pseudo-value method only
  std::optional<double> pseudo_split;   // pseudo-value method only

  bool operator==(const CandidateSplit& other) const;
};

// Candidate thresholds are the observed values of the mother node, ascending;
// thresholds that would empty the right daughter are skipped. Returns nullopt
// when all values are equal. Throws for a categorical predictor.
std::optional<CandidateSplit> BestOrderedSplit(const Dataset& d, RowMultiset mother,
                                               std::size_t predictor);

// Throws std::invalid_argument for an ordered predictor or for classification
// with K > 2.
GammaTable ComputeGammaTable(const Dataset& d, RowMultiset mother,
                             std::size_t predictor);

// Ordered split on the pseudo values. The left set is exactly the present
// levels with gamma <= pseudo split point. Returns nullopt when fewer than two
// distinct gamma values exist. Throws std::invalid_argument when `table` does
// not describe `mother`.
std::optional<CandidateSplit> PseudoValueSplit(const Dataset& d, RowMultiset mother,
                                               std::size_t predictor,
                                               const GammaTable& table);

// Classification only. Evaluates integer encodings 1 .. 2^(Q-1) - 1 in
// increasing order over all Q schema levels (bit q-1 set: level q goes left,
// so level Q always goes right). Encodings leaving a daughter without training
// rows are skipped. Throws std::invalid_argument if Q > max_levels.
std::optional<CandidateSplit> ExhaustiveCategoricalSplit(const Dataset& d,
                                                         RowMultiset mother,
                                                         std::size_t predictor,
                                                         std::uint32_t max_levels = 24);

// Classification only. Draws `num_candidates` encodings whose Q bits are
// independent fair coins; invalid draws are dropped without redrawing.
std::optional<CandidateSplit> RandomCategoricalSplit(const Dataset& d,
                                                     RowMultiset mother,
                                                     std::size_t predictor, Rng& rng,
                                                     std::uint32_t num_candidates);

// 2^(Q-1) - 1, the number of non-redundant bipartitions of Q levels.
std::uint64_t CountPartitions(std::uint32_t num_levels);

enum class Side { kLeft, kRight };

struct ImputedRoute {
  std::uint32_t level;  // 0-based
  Side side;
};

// Side each absent level takes when its pseudo value is imputed as zero, as in
// implementations that initialise per-level means to 0: left iff
// 0 <= pseudo_split.
std::vector<ImputedRoute> EmulateZeroImputedRouting(const GammaTable& table,
                                                    double pseudo_split);

struct SplitMethodConfig {
  // Binary classification: exhaustive search while Q <= this, else pseudo
  // values.
  std::uint32_t binary_exhaustive_max_levels = 10;
  // Multiclass: exhaustive search while Q < this, else random search.
  std::uint32_t multiclass_exhaustive_below = 10;
  std::uint32_t random_candidates = 1024;
  std::uint32_t exhaustive_limit = 24;

  CategoricalMethod Select(Task task, std::uint32_t num_classes,
                           std::uint32_t num_levels) const;
};

// Dispatches to the categorical method chosen by `config`.
std::optional<CandidateSplit> BestCategoricalSplit(const Dataset& d,
                                                   RowMultiset mother,
                                                   std::size_t predictor,
                                                   const SplitMethodConfig& config,
                                                   Rng& rng);

}  // namespace catforest

#endif  // CATFOREST_SPLIT_H_
