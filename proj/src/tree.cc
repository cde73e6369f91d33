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

#include "catforest/tree.h"

#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "catforest/util.h"

namespace catforest {
namespace {

bool IsPure(const Dataset& d, RowMultiset rows) {
  const double first = d.response(rows.front());
  for (std::uint32_t r : rows) {
    if (d.response(r) != first) return false;
  }
  return true;
}

// Draws `k` of `n` indices without replacement (partial Fisher-Yates).
std::vector<std::size_t> SamplePredictors(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.UniformIndex(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

bool GoesLeft(const SplitRule& rule, const Dataset& d, std::uint32_t row) {
  if (rule.kind == SplitKind::kOrdered) {
    return d.ordered_value(rule.predictor, row) <= rule.threshold;
  }
  return rule.left_levels.test(d.level(rule.predictor, row));
}

Node MakeNode(std::uint32_t id, NodeStats stats) {
  Node n;
  n.id = id;
  n.stats = std::move(stats);
  return n;
}

void HashMask(Fnv1a& h, const LevelMask& m) {
  h.U64(m.num_levels());
  for (std::uint64_t w : m.words()) h.U64(w);
}

}  // namespace

SplitRule SplitRule::FromCandidate(const CandidateSplit& c, std::uint32_t num_levels) {
  SplitRule r;
  r.predictor = c.predictor;
  r.kind = c.kind;
  if (c.kind == SplitKind::kOrdered) {
    r.threshold = c.threshold;
    return r;
  }
  r.method = c.method;
  r.present = c.present;
  r.absent = ~c.present;
  r.left_levels = c.left_levels;
  r.bitmask = c.bitmask;
  if (c.gamma) r.gamma = c.gamma->values;
  r.pseudo_split = c.pseudo_split;
  if (r.present.num_levels() != num_levels) {
    throw std::logic_error("SplitRule: level count mismatch");
  }
  return r;
}

Tree::Tree(Task task, std::uint32_t num_classes, std::vector<Node> nodes)
    : task_(task), num_classes_(num_classes), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("Tree: no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.id != i) throw std::invalid_argument("Tree: node ids must be 0..size-1");
    if (n.is_leaf()) continue;
    if (n.left >= nodes_.size() || n.right >= nodes_.size() || n.left == n.right ||
        n.left <= i || n.right <= i) {
      throw std::invalid_argument("Tree: bad child ids at node " + std::to_string(i));
    }
    if (n.left_size == 0 || n.right_size == 0 ||
        n.left_size + n.right_size != n.stats.size) {
      throw std::invalid_argument("Tree: daughter sizes inconsistent at node " +
                                  std::to_string(i));
    }
  }
}

NodeStats ComputeNodeStats(const Dataset& d, RowMultiset rows) {
  if (rows.empty()) throw std::invalid_argument("ComputeNodeStats: empty node");
  NodeStats s;
  s.size = rows.size();
  if (d.task() == Task::kRegression) {
    double sum = 0.0;
    for (std::uint32_t r : rows) sum += d.response(r);
    s.mean = sum / static_cast<double>(s.size);
    return s;
  }
  s.class_counts.assign(d.num_classes(), 0);
  for (std::uint32_t r : rows) ++s.class_counts[d.class_of(r)];
  s.proportions.resize(d.num_classes());
  for (std::uint32_t k = 0; k < d.num_classes(); ++k) {
    s.proportions[k] =
        static_cast<double>(s.class_counts[k]) / static_cast<double>(s.size);
  }
  s.majority = ArgMax(s.proportions);
  return s;
}

Tree GrowTree(const Dataset& d, std::span<const std::uint32_t> in_bag,
              const GrowConfig& config, Rng& rng) {
  if (in_bag.empty()) throw std::invalid_argument("GrowTree: empty in-bag sample");
  const std::size_t num_predictors = d.num_predictors();
  if (config.mtry < 1 || config.mtry > num_predictors) {
    throw std::invalid_argument("GrowTree: mtry must be in [1, P]");
  }

  struct Pending {
    std::uint32_t id;
    std::vector<std::uint32_t> rows;
  };
  std::vector<Node> nodes;
  nodes.push_back(MakeNode(0, ComputeNodeStats(d, in_bag)));
  std::vector<Pending> stack;
  stack.push_back({0, std::vector<std::uint32_t>(in_bag.begin(), in_bag.end())});

  while (!stack.empty()) {
    Pending current = std::move(stack.back());
    stack.pop_back();
    const std::vector<std::uint32_t>& rows = current.rows;
    if (rows.size() <= config.min_node_size || IsPure(d, rows)) continue;

    std::optional<CandidateSplit> best;
    for (std::size_t p : SamplePredictors(num_predictors, config.mtry, rng)) {
      std::optional<CandidateSplit> candidate =
          d.is_categorical(p) ? BestCategoricalSplit(d, rows, p, config.methods, rng)
                              : BestOrderedSplit(d, rows, p);
      if (candidate && (!best || candidate->impurity < best->impurity)) {
        best = std::move(candidate);
      }
    }
    if (!best) continue;

    SplitRule rule = SplitRule::FromCandidate(
        *best, d.is_categorical(best->predictor)
                   ? d.column_schema(best->predictor).num_levels()
                   : 0);
    std::vector<std::uint32_t> left_rows;
    std::vector<std::uint32_t> right_rows;
    for (std::uint32_t r : rows) {
      (GoesLeft(rule, d, r) ? left_rows : right_rows).push_back(r);
    }
    if (left_rows.size() != best->left_size || right_rows.size() != best->right_size) {
      throw std::logic_error("GrowTree: partition disagrees with split search");
    }

    const auto left_id = static_cast<std::uint32_t>(nodes.size());
    const auto right_id = left_id + 1;
    nodes.push_back(MakeNode(left_id, ComputeNodeStats(d, left_rows)));
    nodes.push_back(MakeNode(right_id, ComputeNodeStats(d, right_rows)));
    Node& mother = nodes[current.id];
    mother.split = std::move(rule);
    mother.left = left_id;
    mother.right = right_id;
    mother.left_size = left_rows.size();
    mother.right_size = right_rows.size();
    stack.push_back({right_id, std::move(right_rows)});
    stack.push_back({left_id, std::move(left_rows)});
  }
  return Tree(d.task(), d.task() == Task::kClassification ? d.num_classes() : 0,
              std::move(nodes));
}

PredictionTrace Route(const Tree& tree, const Dataset& x, std::size_t row,
                      Heuristic policy, const RoutingStreams& streams) {
  PredictionTrace trace;
  std::vector<TraceTerminal> stack{{0, 1.0}};
  while (!stack.empty()) {
    const TraceTerminal at = stack.back();
    stack.pop_back();
    const Node& node = tree.node(at.node);
    if (node.is_leaf()) {
      trace.terminals.push_back(at);
      continue;
    }
    const SplitRule& rule = *node.split;
    bool left = false;
    if (rule.kind == SplitKind::kOrdered) {
      left = x.ordered_value(rule.predictor, row) <= rule.threshold;
    } else {
      const std::uint32_t level = x.level(rule.predictor, row);
      if (level >= rule.present.num_levels()) {
        throw std::out_of_range("Route: level index " + std::to_string(level + 1) +
                                " outside the split predictor's " +
                                std::to_string(rule.present.num_levels()) +
                                " levels");
      }
      if (rule.present.test(level)) {
        left = rule.left_levels.test(level);
      } else {
        trace.absent_encountered = true;
        Rng rng = streams.ForNode(node.id);
        const RoutingOutcome outcome =
            Resolve(policy, {node.id, node.left_size, node.right_size}, rng);
        trace.decisions.push_back({node.id, outcome});
        switch (outcome.kind) {
          case RoutingOutcome::Kind::kGoLeft:
            left = true;
            break;
          case RoutingOutcome::Kind::kGoRight:
            left = false;
            break;
          case RoutingOutcome::Kind::kStopHere:
            trace.terminals.push_back(at);
            continue;
          case RoutingOutcome::Kind::kBoth:
            stack.push_back({node.right, at.weight * outcome.right_weight});
            stack.push_back({node.left, at.weight * outcome.left_weight});
            continue;
        }
      }
    }
    stack.push_back({left ? node.left : node.right, at.weight});
  }
  return trace;
}

TreePrediction TreePredict(const PredictionTrace& trace, const Tree& tree) {
  TreePrediction out;
  if (tree.task() == Task::kRegression) {
    for (const TraceTerminal& t : trace.terminals) {
      out.value += t.weight * tree.node(t.node).stats.mean;
    }
    return out;
  }
  out.scores.assign(tree.num_classes(), 0.0);
  for (const TraceTerminal& t : trace.terminals) {
    const auto& pi = tree.node(t.node).stats.proportions;
    for (std::uint32_t k = 0; k < tree.num_classes(); ++k) {
      out.scores[k] += t.weight * pi[k];
    }
  }
  out.vote = ArgMax(out.scores);
  return out;
}

std::uint64_t StructureHash(const Tree& tree) {
  Fnv1a h;
  h.U64(tree.task() == Task::kClassification ? 1 : 0);
  h.U64(tree.num_classes());
  h.U64(tree.size());
  for (const Node& n : tree.nodes()) {
    h.U64(n.id);
    h.U64(n.stats.size);
    h.F64(n.stats.mean);
    for (std::uint64_t c : n.stats.class_counts) h.U64(c);
    h.U64(n.is_leaf() ? 0 : 1);
    if (n.is_leaf()) continue;
    const SplitRule& r = *n.split;
    h.U64(r.predictor);
    h.U64(static_cast<std::uint64_t>(r.kind));
    if (r.kind == SplitKind::kOrdered) {
      h.F64(r.threshold);
    } else {
      h.U64(static_cast<std::uint64_t>(r.method));
      HashMask(h, r.present);
      HashMask(h, r.absent);
      HashMask(h, r.left_levels);
      HashMask(h, r.bitmask);
      h.U64(r.gamma.size());
      for (double g : r.gamma) h.F64(g);
      h.U64(r.pseudo_split ? 1 : 0);
      if (r.pseudo_split) h.F64(*r.pseudo_split);
    }
    h.U64(n.left);
    h.U64(n.right);
    h.U64(n.left_size);
    h.U64(n.right_size);
  }
  return h.digest();
}

std::uint32_t ArgMax(std::span<const double> values) {
  std::uint32_t best = 0;
  for (std::uint32_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

}  // namespace catforest
