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

#ifndef CATFOREST_FOREST_H_
#define CATFOREST_FOREST_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "catforest/dataset.h"
#include "catforest/policy.h"
#include "catforest/rng.h"
#include "catforest/tree.h"

namespace catforest {

struct ForestConfig {
  std::size_t num_trees = 500;
  std::optional<std::size_t> sample_size;  // N'; defaults to N
  GrowConfig grow;
  std::uint64_t seed = 0;

  // B = 500; mtry = max(1, floor(P/3)) for regression, max(1, floor(sqrt(P)))
  // for classification; min node size 5 (regression) or 1 (classification).
  static ForestConfig Defaults(const Dataset& d);
};

std::size_t DefaultMtry(Task task, std::size_t num_predictors);
std::uint64_t DefaultMinNodeSize(Task task);

class Forest {
 public:
  // `in_bag` is the B x N multiplicity matrix in row-major order.
  Forest(ForestConfig config, std::vector<Tree> trees, std::vector<std::uint32_t> in_bag,
         std::size_t num_rows, std::uint64_t fingerprint);

  const ForestConfig& config() const { return config_; }
  std::size_t num_trees() const { return trees_.size(); }
  std::size_t num_rows() const { return num_rows_; }
  std::uint64_t fingerprint() const { return fingerprint_; }
  Task task() const { return trees_.front().task(); }
  std::uint32_t num_classes() const { return trees_.front().num_classes(); }

  const std::vector<Tree>& trees() const { return trees_; }
  const Tree& tree(std::size_t b) const { return trees_.at(b); }
  std::span<const std::uint32_t> in_bag(std::size_t b) const {
    return {in_bag_.data() + b * num_rows_, num_rows_};
  }
  std::uint32_t in_bag_count(std::size_t b, std::size_t row) const {
    return in_bag_[b * num_rows_ + row];
  }

 private:
  ForestConfig config_;
  std::vector<Tree> trees_;
  std::vector<std::uint32_t> in_bag_;
  std::size_t num_rows_;
  std::uint64_t fingerprint_;
};

// Draws `sample_size` row indices uniformly with replacement from [0, N),
// returned sorted. Throws std::invalid_argument when N or sample_size is 0.
std::vector<std::uint32_t> BootstrapSample(std::size_t num_rows,
                                           std::size_t sample_size, Rng& rng);

// Tree b uses the streams DeriveSeed(DeriveSeed(seed, kTree, {b}), kBootstrap)
// and (..., kGrow), so the result does not depend on `threads`. threads <= 0
// leaves the count to OpenMP.
Forest TrainForest(const Dataset& d, const ForestConfig& config, int threads = 0);
// Single-threaded reference with the same output as TrainForest.
Forest TrainForestSerial(const Dataset& d, const ForestConfig& config);

struct ForestPrediction {
  double value = 0.0;                 // regression mean, or the voted class
  std::uint32_t predicted_class = 0;  // classification
  std::vector<double> probabilities;  // classification: vote fractions
  std::uint64_t absent_trees = 0;     // trees whose trace hit an absent level
};

// Aggregates over all trees. Routing streams are keyed by (config seed, tree,
// observation_id).
ForestPrediction ForestPredict(const Forest& forest, const Dataset& x, std::size_t row,
                               Heuristic policy, std::uint64_t observation_id);

struct OobPrediction {
  bool defined = false;  // false when no tree has the row out of bag
  double value = 0.0;
  std::uint32_t predicted_class = 0;
  std::vector<double> probabilities;
  std::uint64_t oob_trees = 0;
  std::uint64_t absent_trees = 0;  // OOB trees whose trace hit an absent level

  bool operator==(const OobPrediction&) const = default;
};

struct OobPredictionSet {
  Task task = Task::kRegression;
  std::uint32_t num_classes = 0;
  std::vector<OobPrediction> rows;

  bool operator==(const OobPredictionSet&) const = default;
};

// Throws DataError when `d` is not the training dataset. Observations are
// processed in parallel.
OobPredictionSet OobPredictAll(const Forest& forest, const Dataset& d, Heuristic policy,
                               int threads = 0);
// Tree-major single-threaded reference.
OobPredictionSet OobPredictAllSerial(const Forest& forest, const Dataset& d,
                                     Heuristic policy);

// Pooled (sum of absent_trees) / (sum of oob_trees) per observation across
// replications; nullopt when the observation never had an OOB tree. Throws
// std::invalid_argument for an empty or ragged input.
std::vector<std::optional<double>> AbsenceProportions(
    std::span<const OobPredictionSet> replications);

// Columns: observation, prediction, p_<class>..., oob_trees, absent_trees.
// Undefined predictions are written as NA.
void WriteOobCsv(const OobPredictionSet& set, const ResponseSpec& response,
                 std::ostream& out);

}  // namespace catforest

#endif  // CATFOREST_FOREST_H_
