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

#include <stdexcept>
#include <string>

namespace catforest {

std::string_view HeuristicName(Heuristic h) {
  switch (h) {
    case Heuristic::kLeft: return "left";
    case Heuristic::kRight: return "right";
    case Heuristic::kStop: return "stop";
    case Heuristic::kMajority: return "majority";
    case Heuristic::kRandom: return "random";
    case Heuristic::kDbi: return "dbi";
    case Heuristic::kOneHot: return "onehot";
  }
  return "?";
}

Heuristic ParseHeuristic(std::string_view token) {
  for (Heuristic h : kAllHeuristics) {
    if (HeuristicName(h) == token) return h;
  }
  throw std::invalid_argument("unknown heuristic '" + std::string(token) +
                              "' (expected left, right, stop, majority, random, "
                              "dbi or onehot)");
}

RoutingOutcome Resolve(Heuristic h, const RoutingContext& ctx, Rng& rng) {
  using Kind = RoutingOutcome::Kind;
  const std::uint64_t size = ctx.left_size + ctx.right_size;
  if (size < 2 || ctx.left_size == 0 || ctx.right_size == 0) {
    throw std::invalid_argument("Resolve: both daughters need training rows");
  }
  switch (h) {
    case Heuristic::kLeft:
      return {Kind::kGoLeft};
    case Heuristic::kRight:
      return {Kind::kGoRight};
    case Heuristic::kStop:
      return {Kind::kStopHere};
    case Heuristic::kMajority:
      if (ctx.left_size != ctx.right_size) {
        return {ctx.left_size > ctx.right_size ? Kind::kGoLeft : Kind::kGoRight};
      }
      return {rng.Coin() ? Kind::kGoLeft : Kind::kGoRight};
    case Heuristic::kRandom: {
      const double p_left =
          static_cast<double>(ctx.left_size) / static_cast<double>(size);
      return {rng.Uniform01() < p_left ? Kind::kGoLeft : Kind::kGoRight};
    }
    case Heuristic::kDbi:
      return {Kind::kBoth,
              static_cast<double>(ctx.left_size) / static_cast<double>(size),
              static_cast<double>(ctx.right_size) / static_cast<double>(size)};
    case Heuristic::kOneHot:
      break;
  }
  throw std::invalid_argument(
      "Resolve: onehot is a dataset transform and cannot route absent levels");
}

}  // namespace catforest
