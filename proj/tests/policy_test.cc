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

#include "catforest/policy.h"

#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

namespace catforest {
namespace {

using Kind = RoutingOutcome::Kind;

TEST(HeuristicTokenTest, RoundTrip) {
  for (Heuristic h : kAllHeuristics) EXPECT_EQ(ParseHeuristic(HeuristicName(h)), h);
  EXPECT_EQ(HeuristicName(Heuristic::kDbi), "dbi");
  EXPECT_THROW(ParseHeuristic("middle"), std::invalid_argument);
}

TEST(ResolveTest, FixedRulesNeverDraw) {
  Rng rng(1);
  const RoutingContext ctx{4, 3, 1};
  EXPECT_EQ(Resolve(Heuristic::kLeft, ctx, rng).kind, Kind::kGoLeft);
  EXPECT_EQ(Resolve(Heuristic::kRight, ctx, rng).kind, Kind::kGoRight);
  EXPECT_EQ(Resolve(Heuristic::kStop, ctx, rng).kind, Kind::kStopHere);
  EXPECT_EQ(Resolve(Heuristic::kMajority, ctx, rng).kind, Kind::kGoLeft);
  const RoutingOutcome dbi = Resolve(Heuristic::kDbi, ctx, rng);
  EXPECT_EQ(dbi.kind, Kind::kBoth);
  EXPECT_DOUBLE_EQ(dbi.left_weight, 0.75);
  EXPECT_DOUBLE_EQ(dbi.right_weight, 0.25);
  EXPECT_EQ(rng.draws(), 0u);
}

TEST(ResolveTest, MajorityDrawsOnlyOnTie) {
  Rng rng(2);
  EXPECT_EQ(Resolve(Heuristic::kMajority, {0, 1, 5}, rng).kind, Kind::kGoRight);
  EXPECT_EQ(rng.draws(), 0u);
  Resolve(Heuristic::kMajority, {0, 2, 2}, rng);
  EXPECT_EQ(rng.draws(), 1u);
}

TEST(ResolveTest, DbiEvenSplit) {
  Rng rng(3);
  const RoutingOutcome o = Resolve(Heuristic::kDbi, {0, 2, 2}, rng);
  EXPECT_EQ(o, (RoutingOutcome{Kind::kBoth, 0.5, 0.5}));
}

TEST(ResolveTest, RandomIsWeightedByDaughterSize) {
  constexpr int kDraws = 10000;
  Rng rng(4);
  int left = 0;
  for (int i = 0; i < kDraws; ++i) {
    if (Resolve(Heuristic::kRandom, {0, 1, 3}, rng).kind == Kind::kGoLeft) ++left;
  }
  EXPECT_EQ(rng.draws(), static_cast<std::uint64_t>(kDraws));
  const double freq = static_cast<double>(left) / kDraws;
  EXPECT_NEAR(freq, 0.25, 0.02);
  // Also within 3 binomial standard deviations.
  EXPECT_LE(std::abs(freq - 0.25), 3.0 * std::sqrt(0.25 * 0.75 / kDraws));
}

TEST(ResolveTest, ReplaysFromSameStream) {
  const RoutingStreams streams{99, 7, 12};
  for (std::uint32_t node = 0; node < 50; ++node) {
    Rng a = streams.ForNode(node);
    Rng b = streams.ForNode(node);
    EXPECT_EQ(Resolve(Heuristic::kRandom, {node, 2, 5}, a),
              Resolve(Heuristic::kRandom, {node, 2, 5}, b));
    EXPECT_EQ(Resolve(Heuristic::kMajority, {node, 3, 3}, a),
              Resolve(Heuristic::kMajority, {node, 3, 3}, b));
  }
}

TEST(ResolveTest, RejectsOneHotAndEmptyDaughters) {
  Rng rng(5);
  EXPECT_THROW(Resolve(Heuristic::kOneHot, {0, 2, 2}, rng), std::invalid_argument);
  EXPECT_THROW(Resolve(Heuristic::kLeft, {0, 1, 0}, rng), std::invalid_argument);
}

}  // namespace
}  // namespace catforest
