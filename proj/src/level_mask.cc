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

#include "catforest/level_mask.h"

#include <bit>
#include <stdexcept>

namespace catforest {
namespace {

int HexValue(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

LevelMask LevelMask::FromEncoding(std::uint32_t num_levels, std::uint64_t code) {
  LevelMask mask(num_levels);
  for (std::uint32_t q = 0; q < num_levels && q < 64; ++q) {
    if ((code >> q) & 1ULL) mask.set(q);
  }
  return mask;
}

std::uint32_t LevelMask::count() const {
  std::uint32_t total = 0;
  for (std::uint64_t w : words_) total += std::popcount(w);
  return total;
}

std::vector<std::uint32_t> LevelMask::levels() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t q = 0; q < num_levels_; ++q) {
    if (test(q)) out.push_back(q);
  }
  return out;
}

LevelMask LevelMask::operator&(const LevelMask& other) const {
  LevelMask out(*this);
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] &= other.words_[i];
  return out;
}

LevelMask LevelMask::operator|(const LevelMask& other) const {
  LevelMask out(*this);
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] |= other.words_[i];
  return out;
}

LevelMask LevelMask::operator~() const {
  LevelMask out(num_levels_);
  for (std::uint32_t q = 0; q < num_levels_; ++q) {
    if (!test(q)) out.set(q);
  }
  return out;
}

std::string LevelMask::ToHex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string digits;
  for (std::size_t w = words_.size(); w-- > 0;) {
    for (int shift = 60; shift >= 0; shift -= 4) {
      const int nibble = static_cast<int>((words_[w] >> shift) & 0xF);
      if (digits.empty() && nibble == 0) continue;
      digits.push_back(kDigits[nibble]);
    }
  }
  if (digits.empty()) digits = "0";
  return "0x" + digits;
}

LevelMask LevelMask::FromHex(std::uint32_t num_levels, std::string_view hex) {
  if (hex.size() < 3 || hex[0] != '0' || (hex[1] != 'x' && hex[1] != 'X')) {
    throw std::invalid_argument("level mask must be 0x-prefixed hex: " +
                                std::string(hex));
  }
  LevelMask mask(num_levels);
  std::uint32_t bit = 0;
  for (std::size_t i = hex.size(); i-- > 2; bit += 4) {
    const int v = HexValue(hex[i]);
    if (v < 0) {
      throw std::invalid_argument("bad hex digit in level mask: " +
                                  std::string(hex));
    }
    for (int b = 0; b < 4; ++b) {
      if (!((v >> b) & 1)) continue;
      if (bit + b >= num_levels) {
        throw std::invalid_argument("level mask " + std::string(hex) +
                                    " has bits beyond " +
                                    std::to_string(num_levels) + " levels");
      }
      mask.set(bit + b);
    }
  }
  return mask;
}

}  // namespace catforest
