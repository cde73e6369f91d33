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

#ifndef CATFOREST_RNG_H_
#define CATFOREST_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace catforest {

// Stream tags used by the seed derivation tree. Values are part of the
// reproducibility contract; never renumber.
enum class SeedTag : std::uint64_t {
  kReplication = 1,
  kTree = 2,
  kBootstrap = 3,
  kGrow = 4,
  kRoute = 5,
};

// SplitMix64 finalizer.
std::uint64_t MixBits(std::uint64_t x);

// Derives a child seed from `parent` along a path of integers. The scheme is
//   seed = parent; for each v in (tag, path...): seed = mix(seed ^ mix(v + c))
// which gives independent, order-sensitive streams such as
//   master -> (replication r) -> (tree b) -> (route, node, observation).
std::uint64_t DeriveSeed(std::uint64_t parent, SeedTag tag,
                         std::initializer_list<std::uint64_t> path = {});

// Seeded random stream. Distributions are implemented here instead of using
// <random> distributions so that draws are identical across standard library
// implementations. Every primitive draw increments `draws()`.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t UniformIndex(std::uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform01();

  // Fair coin.
  bool Coin();

  std::uint64_t draws() const { return draws_; }

 private:
  std::uint64_t Next() {
    ++draws_;
    return engine_();
  }

  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace catforest

#endif  // CATFOREST_RNG_H_
