// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>

namespace cogent {

/// 128-bit similarity hash code. Codes are produced upstream (by a deep hashing
/// model) and only compared here.
struct SimHash {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  /// Parses exactly 32 hex digits (either case). Throws ParameterError otherwise.
  static SimHash from_hex(std::string_view text);
  std::string to_hex() const;

  friend bool operator==(const SimHash&, const SimHash&) = default;
};

inline int hamming_distance(const SimHash& a, const SimHash& b) {
  return std::popcount(a.hi ^ b.hi) + std::popcount(a.lo ^ b.lo);
}

// Flips bit `index` (0 = least significant bit of lo, 127 = most significant of hi).
inline SimHash flip_bit(SimHash code, int index) {
  if (index < 64) {
    code.lo ^= std::uint64_t{1} << index;
  } else {
    code.hi ^= std::uint64_t{1} << (index - 64);
  }
  return code;
}

}  // namespace cogent
