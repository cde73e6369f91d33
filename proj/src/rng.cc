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

#include "catforest/rng.h"

#include <limits>
#include <stdexcept>

namespace catforest {

std::uint64_t MixBits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t DeriveSeed(std::uint64_t parent, SeedTag tag,
                         std::initializer_list<std::uint64_t> path) {
  std::uint64_t seed = MixBits(parent ^ MixBits(static_cast<std::uint64_t>(tag)));
  for (std::uint64_t v : path) seed = MixBits(seed ^ MixBits(v));
  return seed;
}

std::uint64_t Rng::UniformIndex(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::UniformIndex: n must be > 0");
  // Rejection sampling on the largest multiple of n.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = Next();
  while (x >= limit) x = Next();
  return x % n;
}

double Rng::Uniform01() {
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

bool Rng::Coin() { return (Next() >> 63) != 0; }

}  // namespace catforest
