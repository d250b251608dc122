// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include "cogent/simhash.hpp"

#include "cogent/error.hpp"

namespace cogent {
namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

SimHash SimHash::from_hex(std::string_view text) {
  if (text.size() != 32) {
    throw ParameterError("simhash must be 32 hex digits (128 bits), got " +
                         std::to_string(text.size()) + " characters");
  }
  SimHash code;
  for (std::size_t i = 0; i < 32; ++i) {
    const int v = hex_value(text[i]);
    if (v < 0) throw ParameterError("simhash has non-hex character '" + std::string(1, text[i]) + "'");
    std::uint64_t& word = i < 16 ? code.hi : code.lo;
    word = (word << 4) | static_cast<std::uint64_t>(v);
  }
  return code;
}

std::string SimHash::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(32, '0');
  for (int i = 0; i < 16; ++i) {
    out[15 - i] = kDigits[(hi >> (4 * i)) & 0xf];
    out[31 - i] = kDigits[(lo >> (4 * i)) & 0xf];
  }
  return out;
}

}  // namespace cogent
