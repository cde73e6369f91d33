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

#ifndef CATFOREST_POLICY_H_
#define CATFOREST_POLICY_H_

#include <array>
#include <cstdint>
#include <string_view>

#include "catforest/rng.h"

namespace catforest {

// What to do with an observation whose level was absent from the mother node
// when a categorical split was grown. OneHot is a dataset transform, not a
// routing rule; it is listed here so that report tokens live in one place.
enum class Heuristic { kLeft, kRight, kStop, kMajority, kRandom, kDbi, kOneHot };

inline constexpr std::array<Heuristic, 7> kAllHeuristics = {
    Heuristic::kLeft,   Heuristic::kRight, Heuristic::kStop,  Heuristic::kMajority,
    Heuristic::kRandom, Heuristic::kDbi,   Heuristic::kOneHot};

// Stable tokens: left, right, stop, majority, random, dbi, onehot.
std::string_view HeuristicName(Heuristic h);
// Throws std::invalid_argument for an unknown token.
Heuristic ParseHeuristic(std::string_view token);

struct RoutingContext {
  std::uint32_t node = 0;
  std::uint64_t left_size = 0;   // in-bag training rows sent left at growth
  std::uint64_t right_size = 0;
};

struct RoutingOutcome {
  enum class Kind { kGoLeft, kGoRight, kStopHere, kBoth };
  Kind kind = Kind::kGoLeft;
  double left_weight = 0.0;   // kBoth only
  double right_weight = 0.0;  // kBoth only

  bool operator==(const RoutingOutcome&) const = default;
};

// Left/Right/Stop/DBI never draw from `rng`; Majority draws one coin only on
// a size tie; Random draws one uniform. Throws std::invalid_argument for
// OneHot or for daughters with fewer than two rows in total.
RoutingOutcome Resolve(Heuristic h, const RoutingContext& ctx, Rng& rng);

// Source of per-decision random streams during routing. The stream for a
// decision depends only on (seed, tree, node, observation), so replaying an
// observation under a different heuristic sees the same coin flips.
struct RoutingStreams {
  std::uint64_t seed = 0;
  std::uint64_t tree = 0;
  std::uint64_t observation = 0;

  Rng ForNode(std::uint32_t node) const {
    return Rng(DeriveSeed(seed, SeedTag::kRoute, {tree, node, observation}));
  }
};

}  // namespace catforest

#endif  // CATFOREST_POLICY_H_
