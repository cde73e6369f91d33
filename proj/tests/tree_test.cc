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

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "catforest/forest.h"
#include "support/synthetic.h"

namespace catforest {
namespace {

using testing::MixedData;
using testing::MixedSpec;
using testing::SingleCategorical;

std::vector<std::uint32_t> AllRows(const Dataset& d) {
  std::vector<std::uint32_t> rows(d.num_rows());
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

Node Leaf(std::uint32_t id, std::uint64_t size, double mean) {
  Node n;
  n.id = id;
  n.stats.size = size;
  n.stats.mean = mean;
  return n;
}

// Root splits categorical predictor 0 (Q = 3): level 1 left, level 2 right,
// level 3 absent. Three training rows went left and one right.
Tree StumpWithAbsentLevel(double left_mean, double right_mean) {
  Node root = Leaf(0, 4, 0.0);
  SplitRule rule;
  rule.predictor = 0;
  rule.kind = SplitKind::kCategorical;
  rule.present = LevelMask::FromEncoding(3, 0b011);
  rule.absent = LevelMask::FromEncoding(3, 0b100);
  rule.left_levels = LevelMask::FromEncoding(3, 0b001);
  rule.bitmask = rule.left_levels;
  root.split = rule;
  root.left = 1;
  root.right = 2;
  root.left_size = 3;
  root.right_size = 1;
  return Tree(Task::kRegression, 0, {root, Leaf(1, 3, left_mean), Leaf(2, 1, right_mean)});
}

const RoutingStreams kStreams{1, 0, 0};

TEST(GrowTreeTest, PureNodeIsALeaf) {
  const Dataset d = SingleCategorical(2, {0, 1, 0}, {1, 1, 1}, Task::kClassification, 2);
  Rng rng(1);
  const Tree t = GrowTree(d, AllRows(d), GrowConfig{}, rng);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_TRUE(t.node(0).is_leaf());
}

TEST(GrowTreeTest, PerfectBinarySplitGivesDepthOne) {
  const Dataset d =
      SingleCategorical(2, {0, 0, 1, 1, 0}, {0, 0, 1, 1, 0}, Task::kClassification, 2);
  Rng rng(1);
  const Tree t = GrowTree(d, AllRows(d), GrowConfig{}, rng);
  ASSERT_EQ(t.size(), 3u);
  const Node& root = t.node(0);
  ASSERT_FALSE(root.is_leaf());
  EXPECT_EQ(root.split->kind, SplitKind::kCategorical);
  EXPECT_TRUE(t.node(root.left).is_leaf());
  EXPECT_TRUE(t.node(root.right).is_leaf());
  EXPECT_EQ(t.node(root.left).stats.proportions, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(t.node(root.right).stats.proportions, (std::vector<double>{0.0, 1.0}));
}

TEST(GrowTreeTest, ValidatesInputs) {
  const Dataset d = MixedData(1, MixedSpec{});
  Rng rng(1);
  GrowConfig bad;
  bad.mtry = 0;
  EXPECT_THROW(GrowTree(d, AllRows(d), bad, rng), std::invalid_argument);
  bad.mtry = d.num_predictors() + 1;
  EXPECT_THROW(GrowTree(d, AllRows(d), bad, rng), std::invalid_argument);
  EXPECT_THROW(GrowTree(d, {}, GrowConfig{}, rng), std::invalid_argument);
}

TEST(GrowTreeTest, SameSeedSameHash) {
  const Dataset d = MixedData(2, MixedSpec{});
  Rng boot(3);
  const auto in_bag = BootstrapSample(d.num_rows(), d.num_rows(), boot);
  GrowConfig cfg;
  cfg.mtry = 2;
  Rng a(9);
  Rng b(9);
  EXPECT_EQ(StructureHash(GrowTree(d, in_bag, cfg, a)),
            StructureHash(GrowTree(d, in_bag, cfg, b)));
}

TEST(GrowTreeTest, NeverReadsOutOfBagRows) {
  MixedSpec spec;
  spec.rows = 80;
  const Dataset d = MixedData(4, spec);
  Rng boot(5);
  const auto in_bag = BootstrapSample(d.num_rows(), d.num_rows(), boot);
  std::vector<bool> used(d.num_rows(), false);
  for (std::uint32_t r : in_bag) used[r] = true;

  // Scramble every out-of-bag row.
  std::vector<Dataset::Column> cols;
  for (std::size_t p = 0; p < d.num_predictors(); ++p) {
    Dataset::Column c;
    if (d.is_categorical(p)) {
      c.levels.assign(d.level_column(p).begin(), d.level_column(p).end());
      for (std::size_t n = 0; n < d.num_rows(); ++n) {
        if (!used[n]) c.levels[n] = 0;
      }
    } else {
      c.values.assign(d.ordered_column(p).begin(), d.ordered_column(p).end());
      for (std::size_t n = 0; n < d.num_rows(); ++n) {
        if (!used[n]) c.values[n] = -1e6;
      }
    }
    cols.push_back(std::move(c));
  }
  std::vector<double> y(d.responses().begin(), d.responses().end());
  for (std::size_t n = 0; n < d.num_rows(); ++n) {
    if (!used[n]) y[n] = 1e6;
  }
  const Dataset scrambled(d.schema(), d.response_spec(), std::move(cols), std::move(y));

  GrowConfig cfg;
  cfg.mtry = 3;
  Rng a(6);
  Rng b(6);
  EXPECT_EQ(StructureHash(GrowTree(d, in_bag, cfg, a)),
            StructureHash(GrowTree(scrambled, in_bag, cfg, b)));
}

TEST(GrowTreeTest, DaughterSizesAddUp) {
  const Dataset d = MixedData(7, MixedSpec{});
  Rng rng(8);
  const auto in_bag = BootstrapSample(d.num_rows(), d.num_rows(), rng);
  GrowConfig cfg;
  cfg.mtry = 2;
  cfg.min_node_size = 5;
  const Tree t = GrowTree(d, in_bag, cfg, rng);
  EXPECT_EQ(t.node(0).stats.size, in_bag.size());
  for (const Node& n : t.nodes()) {
    if (n.is_leaf()) continue;
    EXPECT_GT(n.stats.size, cfg.min_node_size);
    EXPECT_EQ(t.node(n.left).stats.size, n.left_size);
    EXPECT_EQ(t.node(n.right).stats.size, n.right_size);
    EXPECT_GT(n.left, n.id);
    EXPECT_GT(n.right, n.id);
    if (n.split->kind == SplitKind::kCategorical) {
      EXPECT_TRUE((n.split->left_levels & n.split->absent).empty());
      EXPECT_TRUE((n.split->present | n.split->absent) == ~LevelMask(n.split->present.num_levels()));
    }
  }
}

TEST(RouteTest, PresentLevelsGiveOneLeaf) {
  const Tree t = StumpWithAbsentLevel(2.0, 4.0);
  const Dataset x = SingleCategorical(3, {1}, {0.0}, Task::kRegression);
  const PredictionTrace trace = Route(t, x, 0, Heuristic::kStop, kStreams);
  ASSERT_EQ(trace.terminals.size(), 1u);
  EXPECT_EQ(trace.terminals[0].node, 2u);
  EXPECT_EQ(trace.terminals[0].weight, 1.0);
  EXPECT_FALSE(trace.absent_encountered);
  EXPECT_TRUE(trace.decisions.empty());
}

TEST(RouteTest, StopAtRoot) {
  const Tree t = StumpWithAbsentLevel(2.0, 4.0);
  const Dataset x = SingleCategorical(3, {2}, {0.0}, Task::kRegression);
  const PredictionTrace trace = Route(t, x, 0, Heuristic::kStop, kStreams);
  ASSERT_EQ(trace.terminals.size(), 1u);
  EXPECT_EQ(trace.terminals[0].node, 0u);
  EXPECT_EQ(trace.terminals[0].weight, 1.0);
  EXPECT_TRUE(trace.absent_encountered);
}

TEST(RouteTest, DbiForksByDaughterCounts) {
  const Tree t = StumpWithAbsentLevel(2.0, 4.0);
  const Dataset x = SingleCategorical(3, {2}, {0.0}, Task::kRegression);
  const PredictionTrace trace = Route(t, x, 0, Heuristic::kDbi, kStreams);
  ASSERT_EQ(trace.terminals.size(), 2u);
  EXPECT_EQ(trace.terminals[0].node, 1u);
  EXPECT_DOUBLE_EQ(trace.terminals[0].weight, 0.75);
  EXPECT_DOUBLE_EQ(trace.terminals[1].weight, 0.25);
  EXPECT_DOUBLE_EQ(TreePredict(trace, t).value, 0.75 * 2.0 + 0.25 * 4.0);
}

TEST(RouteTest, LevelOutsideQThrows) {
  const Tree t = StumpWithAbsentLevel(2.0, 4.0);
  const Dataset x = SingleCategorical(5, {4}, {0.0}, Task::kRegression);
  EXPECT_THROW(Route(t, x, 0, Heuristic::kLeft, kStreams), std::out_of_range);
}

TEST(TreePredictTest, Examples) {
  const Tree single(Task::kRegression, 0, {Leaf(0, 2, 7.0)});
  PredictionTrace one;
  one.terminals = {{0, 1.0}};
  EXPECT_EQ(TreePredict(one, single).value, 7.0);

  const Tree stump = StumpWithAbsentLevel(2.0, 4.0);
  PredictionTrace two;
  two.terminals = {{1, 0.5}, {2, 0.5}};
  EXPECT_EQ(TreePredict(two, stump).value, 3.0);

  Node leaf;
  leaf.stats.size = 4;
  leaf.stats.class_counts = {3, 1};
  leaf.stats.proportions = {0.75, 0.25};
  const Tree cls(Task::kClassification, 2, {leaf});
  EXPECT_EQ(TreePredict(one, cls).vote, 0u);
}

TEST(StructureHashTest, SensitiveToThresholdAndStableUnderRouting) {
  const Dataset d = MixedData(9, MixedSpec{});
  Rng rng(10);
  GrowConfig cfg;
  cfg.mtry = 4;
  const Tree t = GrowTree(d, AllRows(d), cfg, rng);
  const std::uint64_t before = StructureHash(t);
  for (std::size_t n = 0; n < d.num_rows(); ++n) {
    for (Heuristic h : {Heuristic::kLeft, Heuristic::kRandom, Heuristic::kDbi}) {
      Route(t, d, n, h, RoutingStreams{1, 0, n});
    }
  }
  EXPECT_EQ(StructureHash(t), before);

  std::vector<Node> nodes = t.nodes();
  bool changed = false;
  for (Node& n : nodes) {
    if (!n.is_leaf() && n.split->kind == SplitKind::kOrdered) {
      n.split->threshold = std::nextafter(n.split->threshold, 1e300);
      changed = true;
      break;
    }
  }
  ASSERT_TRUE(changed);
  EXPECT_NE(StructureHash(Tree(t.task(), t.num_classes(), nodes)), before);
}

TEST(ArgMaxTest, FirstIndexWinsTies) {
  EXPECT_EQ(ArgMax(std::vector<double>{0.2, 0.4, 0.4}), 1u);
  EXPECT_EQ(ArgMax(std::vector<double>{1.0}), 0u);
}

// Grows trees on bootstrap samples and routes every observation, in-bag or
// not, under each routing heuristic.
class PairedRoutingTest : public ::testing::TestWithParam<Task> {};

TEST_P(PairedRoutingTest, HeuristicsDifferOnlyWhenAbsenceFlagged) {
  MixedSpec spec;
  spec.rows = 70;
  spec.num_categorical = 3;
  spec.levels = {4, 9, 15};
  spec.task = GetParam();
  spec.num_classes = 3;
  const std::vector<Heuristic> routing{Heuristic::kLeft,     Heuristic::kRight,
                                       Heuristic::kStop,     Heuristic::kMajority,
                                       Heuristic::kRandom,   Heuristic::kDbi};
  std::size_t flagged = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Dataset d = MixedData(100 + seed, spec);
    Rng rng(seed);
    const auto in_bag = BootstrapSample(d.num_rows(), d.num_rows(), rng);
    GrowConfig cfg;
    cfg.mtry = 3;
    const Tree t = GrowTree(d, in_bag, cfg, rng);
    for (std::size_t n = 0; n < d.num_rows(); ++n) {
      const RoutingStreams streams{seed, 0, n};
      const PredictionTrace base = Route(t, d, n, Heuristic::kLeft, streams);
      const TreePrediction base_pred = TreePredict(base, t);
      if (base.absent_encountered) ++flagged;
      for (Heuristic h : routing) {
        const PredictionTrace trace = Route(t, d, n, h, streams);
        EXPECT_EQ(trace.absent_encountered, base.absent_encountered);
        double total = 0.0;
        for (const TraceTerminal& term : trace.terminals) {
          EXPECT_GT(term.weight, 0.0);
          total += term.weight;
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
        if (!trace.absent_encountered) {
          const TreePrediction pred = TreePredict(trace, t);
          EXPECT_EQ(pred.value, base_pred.value);
          EXPECT_EQ(pred.scores, base_pred.scores);
          EXPECT_EQ(pred.vote, base_pred.vote);
        }
      }
    }
  }
  EXPECT_GT(flagged, 0u) << "generator never produced an absent level";
}

INSTANTIATE_TEST_SUITE_P(Tasks, PairedRoutingTest,
                         ::testing::Values(Task::kRegression, Task::kClassification));

}  // namespace
}  // namespace catforest
