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

#ifndef CATFOREST_LEVEL_MASK_H_
#define CATFOREST_LEVEL_MASK_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace catforest {

// Set of levels of one categorical predictor with Q levels. Bit i stands for
// the level stored as index i, i.e. the level with 1-based index i + 1. Read as
// an unsigned integer (little-endian words), bit q - 1 <-> level q; this is the
// integer encoding used for categorical splits and in model dumps.
class LevelMask {
 public:
  LevelMask() = default;
  explicit LevelMask(std::uint32_t num_levels)
      : num_levels_(num_levels), words_((num_levels + 63) / 64, 0) {}

  // Mask for Q <= 64 levels from an integer encoding. Bits at or above Q are
  // ignored.
  static LevelMask FromEncoding(std::uint32_t num_levels, std::uint64_t code);

  std::uint32_t num_levels() const { return num_levels_; }

  bool test(std::uint32_t level) const {
    return (words_[level >> 6] >> (level & 63)) & 1ULL;
  }
  void set(std::uint32_t level) { words_[level >> 6] |= 1ULL << (level & 63); }
  void reset(std::uint32_t level) {
    words_[level >> 6] &= ~(1ULL << (level & 63));
  }

  std::uint32_t count() const;
  bool empty() const { return count() == 0; }

  // Levels whose bits are on, ascending.
  std::vector<std::uint32_t> levels() const;

  LevelMask operator&(const LevelMask& other) const;
  LevelMask operator|(const LevelMask& other) const;
  // Complement within the Q levels.
  LevelMask operator~() const;

  bool operator==(const LevelMask& other) const = default;

  // "0x"-prefixed lowercase hexadecimal of the integer encoding, without
  // leading zeros ("0x0" for the empty set).
  std::string ToHex() const;
  static LevelMask FromHex(std::uint32_t num_levels, std::string_view hex);

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  std::uint32_t num_levels_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace catforest

#endif  // CATFOREST_LEVEL_MASK_H_
