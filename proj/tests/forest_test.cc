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

#include "catforest/forest.h"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "catforest/errors.h"
#include "support/synthetic.h"

namespace catforest {
namespace {

using testing::MixedData;
using testing::MixedSpec;

Tree RegressionLeaf(double mean) {
  Node n;
  n.stats.size = 1;
  n.stats.mean = mean;
  return Tree(Task::kRegression, 0, {n});
}

Tree ClassLeaf(std::uint32_t k) {
  Node n;
  n.stats.size = 1;
  n.stats.class_counts = {0, 0};
  n.stats.class_counts[k] = 1;
  n.stats.proportions = {0.0, 0.0};
  n.stats.proportions[k] = 1.0;
  n.stats.majority = k;
  return Tree(Task::kClassification, 2, {n});
}

ForestConfig SmallConfig(const Dataset& d, std::size_t trees, std::uint64_t seed) {
  ForestConfig c = ForestConfig::Defaults(d);
  c.num_trees = trees;
  c.seed = seed;
  return c;
}

TEST(DefaultsTest, MtryAndNodeSize) {
  EXPECT_EQ(DefaultMtry(Task::kRegression, 25), 8u);
  EXPECT_EQ(DefaultMtry(Task::kRegression, 2), 1u);
  EXPECT_EQ(DefaultMtry(Task::kClassification, 4), 2u);
  EXPECT_EQ(DefaultMtry(Task::kClassification, 7), 2u);
  EXPECT_EQ(DefaultMtry(Task::kClassification, 9), 3u);
  EXPECT_EQ(DefaultMtry(Task::kClassification, 1), 1u);
  EXPECT_EQ(DefaultMinNodeSize(Task::kRegression), 5u);
  EXPECT_EQ(DefaultMinNodeSize(Task::kClassification), 1u);
}

TEST(BootstrapTest, SingleRowAndSize) {
  Rng rng(1);
  EXPECT_EQ(BootstrapSample(1, 5, rng), (std::vector<std::uint32_t>(5, 0)));
  EXPECT_EQ(BootstrapSample(10, 7, rng).size(), 7u);
  EXPECT_THROW(BootstrapSample(0, 5, rng), std::invalid_argument);
  EXPECT_THROW(BootstrapSample(5, 0, rng), std::invalid_argument);
}

TEST(BootstrapTest, OutOfBagFractionMatchesLimit) {
  constexpr int kDraws = 10000;
  constexpr std::size_t kRows = 100;
  const double expected = std::pow(1.0 - 1.0 / kRows, kRows);  // 0.366
  std::vector<int> oob(kRows, 0);
  for (int i = 0; i < kDraws; ++i) {
    Rng rng(DeriveSeed(17, SeedTag::kBootstrap, {static_cast<std::uint64_t>(i)}));
    std::vector<bool> in(kRows, false);
    for (std::uint32_t r : BootstrapSample(kRows, kRows, rng)) in[r] = true;
    for (std::size_t r = 0; r < kRows; ++r) oob[r] += in[r] ? 0 : 1;
  }
  for (std::size_t r = 0; r < kRows; ++r) {
    EXPECT_NEAR(static_cast<double>(oob[r]) / kDraws, expected, 0.02) << "row " << r;
  }
}

TEST(TrainForestTest, InBagRowsSumToSampleSize) {
  const Dataset d = MixedData(1, MixedSpec{});
  ForestConfig c = SmallConfig(d, 20, 3);
  c.sample_size = 50;
  const Forest f = TrainForest(d, c);
  for (std::size_t b = 0; b < f.num_trees(); ++b) {
    const auto row = f.in_bag(b);
    EXPECT_EQ(std::accumulate(row.begin(), row.end(), 0u), 50u);
    EXPECT_EQ(f.tree(b).node(0).stats.size, 50u);
  }
}

TEST(TrainForestTest, DeterministicAcrossThreadCountsAndSerial) {
  MixedSpec spec;
  spec.task = Task::kClassification;
  spec.num_classes = 3;
  spec.levels = {4, 12};
  const Dataset d = MixedData(2, spec);
  const ForestConfig c = SmallConfig(d, 40, 11);
  const Forest serial = TrainForestSerial(d, c);
  for (int threads : {1, 2, 4}) {
    const Forest f = TrainForest(d, c, threads);
    ASSERT_EQ(f.num_trees(), serial.num_trees());
    for (std::size_t b = 0; b < f.num_trees(); ++b) {
      EXPECT_EQ(StructureHash(f.tree(b)), StructureHash(serial.tree(b)));
      EXPECT_TRUE(std::equal(f.in_bag(b).begin(), f.in_bag(b).end(),
                             serial.in_bag(b).begin()));
    }
    for (Heuristic h : {Heuristic::kRandom, Heuristic::kMajority, Heuristic::kDbi}) {
      EXPECT_EQ(OobPredictAll(f, d, h, threads), OobPredictAllSerial(serial, d, h));
    }
  }
}

TEST(TrainForestTest, SingleTreeIsCartOnItsBootstrap) {
  const Dataset d = MixedData(3, MixedSpec{});
  const ForestConfig c = SmallConfig(d, 1, 5);
  const Forest f = TrainForest(d, c);
  const std::uint64_t tree_seed = DeriveSeed(c.seed, SeedTag::kTree, {0});
  Rng boot(DeriveSeed(tree_seed, SeedTag::kBootstrap));
  Rng grow(DeriveSeed(tree_seed, SeedTag::kGrow));
  const auto sample = BootstrapSample(d.num_rows(), d.num_rows(), boot);
  EXPECT_EQ(StructureHash(f.tree(0)), StructureHash(GrowTree(d, sample, c.grow, grow)));
}

TEST(ForestPredictTest, AveragesAndVotes) {
  const Dataset x = testing::SingleCategorical(1, {0}, {0.0}, Task::kRegression);
  ForestConfig c;
  const Forest reg(c, {RegressionLeaf(2.0), RegressionLeaf(4.0)}, {1, 1}, 1, 0);
  EXPECT_DOUBLE_EQ(ForestPredict(reg, x, 0, Heuristic::kLeft, 0).value, 3.0);

  const Forest cls(c, {ClassLeaf(0), ClassLeaf(0), ClassLeaf(1)}, {1, 1, 1}, 1, 0);
  const ForestPrediction p = ForestPredict(cls, x, 0, Heuristic::kLeft, 0);
  EXPECT_EQ(p.predicted_class, 0u);
  EXPECT_DOUBLE_EQ(p.probabilities[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(p.probabilities[1], 1.0 / 3.0);
}

TEST(ForestTest, ConstructorRejectsBadInBag) {
  ForestConfig c;
  // Row sums must equal N' = N = 2.
  EXPECT_THROW(Forest(c, {RegressionLeaf(1.0)}, {1, 0}, 2, 0), std::invalid_argument);
}

TEST(OobTest, SingleTreeInBagRowsAreUndefined) {
  const Dataset d = MixedData(4, MixedSpec{});
  const Forest f = TrainForest(d, SmallConfig(d, 1, 6));
  const OobPredictionSet set = OobPredictAll(f, d, Heuristic::kDbi);
  std::size_t undefined = 0;
  for (std::size_t n = 0; n < d.num_rows(); ++n) {
    EXPECT_EQ(set.rows[n].defined, f.in_bag_count(0, n) == 0);
    undefined += set.rows[n].defined ? 0 : 1;
  }
  EXPECT_GT(undefined, 0u);
}

TEST(OobTest, LargeForestDefinesEveryRowAndProbabilitiesSumToOne) {
  MixedSpec spec;
  spec.task = Task::kClassification;
  spec.num_classes = 3;
  const Dataset d = MixedData(5, spec);
  const Forest f = TrainForest(d, SmallConfig(d, 500, 7));
  const OobPredictionSet set = OobPredictAll(f, d, Heuristic::kDbi);
  for (const OobPrediction& p : set.rows) {
    ASSERT_TRUE(p.defined);
    EXPECT_LE(p.absent_trees, p.oob_trees);
    EXPECT_NEAR(std::accumulate(p.probabilities.begin(), p.probabilities.end(), 0.0), 1.0,
                1e-12);
  }
}

TEST(OobTest, NoCategoricalPredictorsMeansNoAbsence) {
  MixedSpec spec;
  spec.num_categorical = 0;
  const Dataset d = MixedData(6, spec);
  const Forest f = TrainForest(d, SmallConfig(d, 30, 8));
  const OobPredictionSet left = OobPredictAll(f, d, Heuristic::kLeft);
  const OobPredictionSet right = OobPredictAll(f, d, Heuristic::kRight);
  for (const OobPrediction& p : left.rows) EXPECT_EQ(p.absent_trees, 0u);
  EXPECT_EQ(left, right);
  const OobPredictionSet sets[] = {left};
  for (const auto& prop : AbsenceProportions(sets)) {
    if (prop) {
      EXPECT_EQ(*prop, 0.0);
    }
  }
}

TEST(OobTest, HeuristicsDifferOnlyOnRowsWithAbsentTrees) {
  MixedSpec spec;
  spec.levels = {6, 14};
  const Dataset d = MixedData(7, spec);
  const Forest f = TrainForest(d, SmallConfig(d, 60, 9));
  const OobPredictionSet base = OobPredictAll(f, d, Heuristic::kLeft);
  std::size_t affected = 0;
  for (Heuristic h : {Heuristic::kRight, Heuristic::kStop, Heuristic::kMajority,
                      Heuristic::kRandom, Heuristic::kDbi}) {
    const OobPredictionSet other = OobPredictAll(f, d, h);
    for (std::size_t n = 0; n < d.num_rows(); ++n) {
      EXPECT_EQ(other.rows[n].absent_trees, base.rows[n].absent_trees);
      if (base.rows[n].absent_trees == 0) {
        EXPECT_EQ(other.rows[n], base.rows[n]);
      } else {
        ++affected;
      }
    }
  }
  EXPECT_GT(affected, 0u);
}

TEST(OobTest, RandomAndMajorityReplay) {
  MixedSpec spec;
  spec.levels = {5, 11};
  const Dataset d = MixedData(8, spec);
  const ForestConfig c = SmallConfig(d, 50, 10);
  const Forest a = TrainForest(d, c);
  const Forest b = TrainForest(d, c);
  for (Heuristic h : {Heuristic::kRandom, Heuristic::kMajority}) {
    EXPECT_EQ(OobPredictAll(a, d, h, 1), OobPredictAll(b, d, h, 3));
  }
}

TEST(OobTest, RejectsForeignDataset) {
  const Dataset d = MixedData(9, MixedSpec{});
  const Dataset other = MixedData(10, MixedSpec{});
  const Forest f = TrainForest(d, SmallConfig(d, 5, 1));
  EXPECT_THROW(OobPredictAll(f, other, Heuristic::kLeft), DataError);
}

TEST(AbsenceProportionsTest, PoolsCounts) {
  OobPredictionSet a{Task::kRegression, 0, std::vector<OobPrediction>(3)};
  OobPredictionSet b = a;
  a.rows[0].oob_trees = 4;
  a.rows[0].absent_trees = 4;
  b.rows[0].oob_trees = 6;
  b.rows[0].absent_trees = 6;
  a.rows[1].oob_trees = 2;
  a.rows[1].absent_trees = 1;
  b.rows[1].oob_trees = 2;
  const OobPredictionSet sets[] = {a, b};
  const auto p = AbsenceProportions(sets);
  EXPECT_EQ(*p[0], 1.0);
  EXPECT_EQ(*p[1], 0.25);
  EXPECT_FALSE(p[2].has_value());
  EXPECT_THROW(AbsenceProportions({}), std::invalid_argument);
}

TEST(WriteOobCsvTest, ClassificationColumns) {
  OobPredictionSet set{Task::kClassification, 2, std::vector<OobPrediction>(2)};
  set.rows[0] = {true, 1.0, 1, {0.25, 0.75}, 4, 1};
  const ResponseSpec spec{"vote", Task::kClassification, {"No", "Yes"}};
  std::ostringstream out;
  WriteOobCsv(set, spec, out);
  EXPECT_EQ(out.str(),
            "observation,prediction,p_No,p_Yes,oob_trees,absent_trees\n"
            "0,Yes,0.25,0.75,4,1\n"
            "1,NA,NA,NA,0,0\n");
}

}  // namespace
}  // namespace catforest
