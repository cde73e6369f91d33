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

#ifndef CATFOREST_TREE_H_
#define CATFOREST_TREE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "catforest/dataset.h"
#include "catforest/level_mask.h"
#include "catforest/policy.h"
#include "catforest/rng.h"
#include "catforest/split.h"

namespace catforest {

// Training statistics of a node, counted with bootstrap multiplicity.
struct NodeStats {
  std::uint64_t size = 0;
  double mean = 0.0;                        // regression
  std::vector<std::uint64_t> class_counts;  // classification
  std::vector<double> proportions;          // classification, sums to 1
  std::uint32_t majority = 0;               // argmax, lowest index on ties

  bool operator==(const NodeStats&) const = default;
};

struct SplitRule {
  std::size_t predictor = 0;
  SplitKind kind = SplitKind::kOrdered;
  double threshold = 0.0;  // kOrdered

  // kCategorical. `present` and `absent` partition the Q levels by whether
  // the mother node's in-bag rows contained them.
  CategoricalMethod method = CategoricalMethod::kPseudoValue;
  LevelMask present;
  LevelMask absent;
  LevelMask left_levels;  // subset of present
  LevelMask bitmask;      // full encoding; equals left_levels on present levels
  std::vector<double> gamma;           // pseudo-value splits; NaN when absent
  std::optional<double> pseudo_split;  // pseudo-value splits

  static SplitRule FromCandidate(const CandidateSplit& c, std::uint32_t num_levels);
};

struct Node {
  std::uint32_t id = 0;
  NodeStats stats;
  std::optional<SplitRule> split;  // empty for leaves
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint64_t left_size = 0;
  std::uint64_t right_size = 0;

  bool is_leaf() const { return !split.has_value(); }
};

struct GrowConfig {
  std::size_t mtry = 1;
  // A node is split only while its size is > min_node_size.
  std::uint64_t min_node_size = 1;
  SplitMethodConfig methods;
};

class Tree {
 public:
  Tree(Task task, std::uint32_t num_classes, std::vector<Node> nodes);

  Task task() const { return task_; }
  std::uint32_t num_classes() const { return num_classes_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::uint32_t id) const { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }

 private:
  Task task_;
  std::uint32_t num_classes_;
  std::vector<Node> nodes_;
};

NodeStats ComputeNodeStats(const Dataset& d, RowMultiset rows);

// Grows an unpruned CART tree on the multiset `in_bag`. At each node `mtry`
// predictors are drawn without replacement from `rng`; the lowest-objective
// candidate wins, ties going to the earlier predictor in draw order. Nodes
// are numbered in creation order with the left subtree grown first. Only
// rows in `in_bag` are read. Throws std::invalid_argument when in_bag is empty
// or mtry is outside [1, P].
Tree GrowTree(const Dataset& d, std::span<const std::uint32_t> in_bag,
              const GrowConfig& config, Rng& rng);

struct TraceTerminal {
  std::uint32_t node = 0;
  double weight = 1.0;
};

struct RoutingDecision {
  std::uint32_t node = 0;
  RoutingOutcome outcome;
};

struct PredictionTrace {
  // Leaves, or internal nodes where Stop ended the descent. Weights are > 0
  // and sum to 1.
  std::vector<TraceTerminal> terminals;
  bool absent_encountered = false;
  // One entry per indeterminate split that was resolved by the heuristic.
  std::vector<RoutingDecision> decisions;
};

// Sends row `row` of `x` down the tree. Present levels follow the split;
// absent levels set absent_encountered and are resolved by `policy` with the
// stream streams.ForNode(node). Throws std::out_of_range when a level index is
// not below the split predictor's Q.
PredictionTrace Route(const Tree& tree, const Dataset& x, std::size_t row,
                      Heuristic policy, const RoutingStreams& streams);

struct TreePrediction {
  double value = 0.0;          // regression: sum of weight * mean
  std::vector<double> scores;  // classification: sum of weight * proportions
  std::uint32_t vote = 0;      // classification: argmax of scores
};

TreePrediction TreePredict(const PredictionTrace& trace, const Tree& tree);

// FNV-1a digest over topology, split rules and node statistics.
std::uint64_t StructureHash(const Tree& tree);

// Index of the largest entry; the lowest index wins ties.
std::uint32_t ArgMax(std::span<const double> values);

}  // namespace catforest

#endif  // CATFOREST_TREE_H_
