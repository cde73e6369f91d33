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

// Paired replication protocol. Each replication trains one forest that every
// routing heuristic shares, plus a separate forest on the one-hot encoded data
// when "onehot" is requested, and scores all of them by OOB prediction.

#ifndef CATFOREST_EXPERIMENT_H_
#define CATFOREST_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "catforest/dataset.h"
#include "catforest/forest.h"
#include "catforest/metrics.h"
#include "catforest/policy.h"
#include "json.hpp"

namespace catforest {

inline constexpr std::string_view kVersion = "1.0.0";

struct ExperimentConfig {
  std::filesystem::path data;    // CSV, read with `schema`
  std::filesystem::path schema;
  std::filesystem::path output;  // report directory
  std::vector<Heuristic> heuristics{Heuristic::kLeft,     Heuristic::kRight,
                                    Heuristic::kStop,     Heuristic::kMajority,
                                    Heuristic::kRandom,   Heuristic::kDbi,
                                    Heuristic::kOneHot};
  // Empty means the default missing-data set restricted to `heuristics`.
  std::vector<Heuristic> baseline;
  std::size_t replications = 100;
  std::uint64_t seed = 1;
  int threads = 0;

  // Forest overrides; unset fields take ForestConfig::Defaults for the
  // dataset being trained (so the one-hot forest gets its own mtry).
  std::optional<std::size_t> num_trees;
  std::optional<std::size_t> mtry;
  std::optional<std::uint64_t> min_node_size;
  std::optional<std::size_t> sample_size;
  SplitMethodConfig methods;

  std::optional<std::string> positive_class;  // binary; default: last class
  std::optional<double> log_loss_epsilon;     // default 1 / (2B)
  double bucket_width = 0.05;

  // Relative paths in `j` are resolved against `base_dir`. Throws DataError
  // for unknown keys, bad tokens or violated invariants.
  static ExperimentConfig FromJson(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir);
  static ExperimentConfig Load(const std::filesystem::path& path);
  nlohmann::json ToJson() const;

  std::vector<Heuristic> EffectiveBaseline() const;
  ForestConfig ForestFor(const Dataset& d, std::uint64_t seed) const;
};

// Per-observation value used for paired differences: the prediction
// (regression), the positive-class probability (binary) or the probability of
// the observed class (multiclass). NaN when undefined.
std::vector<double> PairedValues(const OobPredictionSet& set, const Dataset& d,
                                 std::uint32_t positive);

struct ReplicationReport {
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::map<Heuristic, OobPredictionSet> oob;
  // metric name -> heuristic -> value.
  std::map<std::string, std::map<Heuristic, double>> metrics;
  // Cohen's kappa between the voted classes of two heuristics.
  std::map<std::pair<Heuristic, Heuristic>, double> kappa;
  std::vector<std::uint64_t> shared_hashes;  // per tree of the shared forest
  std::vector<std::uint64_t> onehot_hashes;  // empty unless onehot requested
  std::size_t evaluated_rows = 0;  // observations defined under every heuristic
};

// Runs replication r with seed DeriveSeed(cfg.seed, kReplication, {r}).
// `onehot` must be OneHotTransform(d) when onehot is requested.
ReplicationReport RunReplication(const Dataset& d, const Dataset* onehot,
                                 const ExperimentConfig& cfg, std::size_t r);

struct ExperimentSummary {
  Task task = Task::kRegression;
  std::vector<ReplicationReport> reports;  // OOB sets are dropped after use
  // metric -> heuristic -> per-replication values.
  std::map<std::string, std::map<Heuristic, std::vector<double>>> series;
  std::map<std::pair<Heuristic, Heuristic>, std::vector<double>> kappa;
  // relative metric -> heuristic -> replications where it was the first best
  // baseline member.
  std::map<std::string, std::map<Heuristic, std::size_t>> wins;
  std::vector<std::optional<double>> absence;  // pooled, per observation
  std::vector<std::uint64_t> absent_trees;
  std::vector<std::uint64_t> oob_trees;
  std::map<std::pair<Heuristic, Heuristic>, std::vector<DifferenceBucket>> differences;
};

// Runs every replication on `d`; writes reports under cfg.output unless it is
// empty. A failing replication aborts the run with its id in the message after
// writing a manifest marked incomplete.
ExperimentSummary RunExperiment(const Dataset& d, const ExperimentConfig& cfg);

// Loads cfg.data with cfg.schema, then runs as above.
ExperimentSummary RunExperiment(const ExperimentConfig& cfg);

}  // namespace catforest

#endif  // CATFOREST_EXPERIMENT_H_
