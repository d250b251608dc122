// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cogent/simhash.hpp"

namespace cogent {

enum class Modality { Block, Image, Other };

std::string_view to_string(Modality m);
/// Accepts "Block", "Image", "Other". Throws ParameterError for anything else.
Modality parse_modality(std::string_view text);

/// Ordered key=value request parameters. Stored sorted by key, so the canonical
/// serialization ("k1=v1;k2=v2") and equality are well defined.
///
/// Recognized keys: off, len, w, h, q (non-negative integers, len > 0) and fmt.
/// Any other key is kept verbatim as a free-form extra.
class ParamSet {
 public:
  ParamSet() = default;

  /// Parses `k=v;k=v`. Empty text is the empty set. Throws ParameterError on a
  /// malformed pair, duplicate key, or invalid recognized value.
  static ParamSet parse(std::string_view text);

  std::string canonical() const;

  std::optional<std::string_view> get(std::string_view key) const;
  std::optional<std::uint64_t> get_uint(std::string_view key) const;
  bool contains(std::string_view key) const { return get(key).has_value(); }

  /// Inserts or replaces. Validates like parse().
  ParamSet& set(std::string_view key, std::string_view value);
  ParamSet& set(std::string_view key, std::uint64_t value) { return set(key, std::to_string(value)); }
  ParamSet& erase(std::string_view key);

  const std::vector<std::pair<std::string, std::string>>& pairs() const { return pairs_; }
  bool empty() const { return pairs_.empty(); }

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<std::pair<std::string, std::string>> pairs_;
};

/// Half-open byte interval [offset, offset + length).
struct ByteRange {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;

  std::uint64_t end() const { return offset + length; }
  bool contains(const ByteRange& other) const {
    return other.offset >= offset && other.end() <= end();
  }
  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

struct RequestRecord {
  std::uint64_t timestamp_us = 0;
  std::string key;
  ParamSet params;
  std::uint64_t size = 0;
  std::string content_id;
  Modality modality = Modality::Other;
  std::string format;
  std::optional<SimHash> simhash;
  std::optional<std::uint64_t> origin_latency_override_us;

  friend bool operator==(const RequestRecord&, const RequestRecord&) = default;
};

/// The byte range a block request addresses: off defaults to 0, len to size.
ByteRange requested_range(const ParamSet& params, std::uint64_t size);
inline ByteRange requested_range(const RequestRecord& r) { return requested_range(r.params, r.size); }

/// Block keys follow `<content_id>/<object_name>`; the prefix is everything
/// before the first '/', or the whole key when there is none.
std::string_view key_prefix(std::string_view key);

/// Identity of a cached object: key plus canonical params.
std::string object_id(std::string_view key, const ParamSet& params);
inline std::string object_id(const RequestRecord& r) { return object_id(r.key, r.params); }

struct TraceStats {
  std::uint64_t records = 0;
  std::uint64_t unique_keys = 0;
  std::uint64_t unique_content_ids = 0;
  std::uint64_t bytes = 0;
  std::uint64_t duration_us = 0;

  friend bool operator==(const TraceStats&, const TraceStats&) = default;
};

TraceStats compute_stats(std::span<const RequestRecord> records);

/// Total bytes of the distinct objects (key + params) a trace touches.
std::uint64_t footprint_bytes(std::span<const RequestRecord> records);

/// Fraction of footprint bytes duplicating content already present in another
/// variant of the same content_id (same grouping as the cache redundancy rate).
double footprint_redundancy(std::span<const RequestRecord> records);

inline constexpr std::string_view kTraceHeader =
    "ts_us,key,params,size,content_id,modality,format,simhash,origin_lat_us";

std::vector<RequestRecord> parse_trace(std::istream& in);
std::vector<RequestRecord> parse_trace(const std::filesystem::path& path);

void write_trace(std::ostream& out, std::span<const RequestRecord> records);
void write_trace(const std::filesystem::path& path, std::span<const RequestRecord> records);

/// Checks every record invariant plus timestamp order. Throws ParseError with a
/// 1-based line number (header is line 1) on the first violation.
void validate_records(std::span<const RequestRecord> records);

struct SyntheticSpec {
  std::uint64_t objects = 400;        // N, total variants over all groups
  std::uint64_t groups = 100;         // G <= N
  double zipf_alpha = 1.0;            // popularity over content groups
  double mean_interarrival_us = 1000.0;
  std::uint64_t requests = 10000;     // R
  std::uint64_t seed = 1;

  double image_fraction = 0.5;        // share of groups with Image modality
  std::uint64_t block_size = 1 << 20; // bytes of one block content
  std::uint64_t image_size_min = 64 * 1024;
  std::uint64_t image_size_max = 512 * 1024;
  int intra_group_distance = 4;       // max Hamming distance within a group
  int match_threshold = 8;            // cross-group distance is strictly above this
};

/// Deterministic synthetic trace: groups drawn from Zipf(alpha), variants
/// uniformly within a group, exponential inter-arrival times.
std::vector<RequestRecord> generate_synthetic_trace(const SyntheticSpec& spec);

}  // namespace cogent
