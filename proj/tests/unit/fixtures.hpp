// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <cstdint>
#include <string>

#include "cogent/policies.hpp"
#include "cogent/trace.hpp"

namespace cogent::testing {

inline RequestRecord block(std::uint64_t ts, const std::string& key, std::uint64_t off, std::uint64_t len) {
  RequestRecord r;
  r.timestamp_us = ts;
  r.key = key;
  r.params.set("off", off).set("len", len);
  r.size = len;
  r.content_id = std::string(key_prefix(key));
  r.modality = Modality::Block;
  r.format = "raw";
  return r;
}

inline RequestRecord image(std::uint64_t ts, const std::string& content, std::uint64_t w, std::uint64_t h,
                           const std::string& fmt, std::uint64_t size) {
  RequestRecord r;
  r.timestamp_us = ts;
  r.key = content + "/img";
  r.params.set("w", w).set("h", h).set("fmt", fmt);
  r.size = size;
  r.content_id = content;
  r.modality = Modality::Image;
  r.format = fmt;
  return r;
}

inline RequestRecord plain(std::uint64_t ts, const std::string& key, std::uint64_t size) {
  RequestRecord r;
  r.timestamp_us = ts;
  r.key = key;
  r.size = size;
  r.content_id = key;
  r.modality = Modality::Other;
  r.format = "bin";
  return r;
}

inline CacheEntry entry_of(const RequestRecord& r, std::uint64_t now = 0, std::uint64_t fetch = 0) {
  return CacheEntry::from_request(r, now, fetch);
}

}  // namespace cogent::testing
