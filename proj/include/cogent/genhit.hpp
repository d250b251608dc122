// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cogent/policies.hpp"
#include "cogent/scenario.hpp"
#include "cogent/trace.hpp"

namespace cogent {

using Bytes = std::vector<std::uint8_t>;

/// Generation latency per scenario: base + per_byte * produced size.
struct CostModel {
  // Block split/merge is about 1 ms across 4 KB..1 MB; image transforms about
  // 40 ms; similarity-based revision stays under 150 ms.
  std::array<std::uint64_t, kScenarioCount> base_us = {1000, 1000, 40000, 40000, 120000};
  std::array<double, kScenarioCount> per_byte_us = {0, 0, 0, 0, 0};
  double cpu_cores_per_generation = 1.0;

  /// Throws ParameterError if any term is negative or non-finite.
  void validate() const;
};

std::uint64_t estimate_latency(const CostModel& model, ScenarioKind scenario, std::uint64_t size);

/// Bytes a generated response carries: the requested range for block data,
/// the record size otherwise.
std::uint64_t produced_size(const RequestRecord& req);

/// Returns donor[offset, offset + length). Throws RangeError when the range
/// falls outside the donor or length is zero.
Bytes split_block(std::span<const std::uint8_t> donor, std::uint64_t offset, std::uint64_t length);

/// Concatenates parts in ascending offset order. Throws TilingError naming the
/// first boundary with a gap or overlap.
Bytes merge_blocks(std::vector<std::pair<std::uint64_t, Bytes>> parts);

/// Source of cached object bytes for payload-mode generation.
class PayloadStore {
 public:
  virtual ~PayloadStore() = default;
  virtual std::optional<Bytes> read(const CacheEntry& entry) const = 0;
};

/// Deterministic synthetic bytes: the byte at absolute offset o of content with
/// key prefix P is derived from a seeded hash of (P, o), so any chunk of the same
/// content agrees with every other chunk on overlapping offsets.
class SyntheticPayloadStore : public PayloadStore {
 public:
  explicit SyntheticPayloadStore(std::uint64_t seed) : seed_(seed) {}
  std::optional<Bytes> read(const CacheEntry& entry) const override;
  Bytes bytes_for(std::string_view key, ByteRange range) const;

 private:
  std::uint64_t seed_;
};

/// Explicit payloads keyed by object_id(); used by tests and bindings.
class MapPayloadStore : public PayloadStore {
 public:
  void put(const std::string& id, Bytes bytes) { payloads_[id] = std::move(bytes); }
  std::optional<Bytes> read(const CacheEntry& entry) const override;

 private:
  std::unordered_map<std::string, Bytes> payloads_;
};

struct GenerationOutcome {
  ScenarioKind scenario = ScenarioKind::Disassemble;
  std::uint64_t produced_size = 0;
  std::uint64_t latency_us = 0;
  double cpu_core_us = 0.0;
  std::optional<Bytes> payload;  // block scenarios in payload mode only
};

struct Classification;

/// Produces the response for a pseudo-miss. With a payload store, block
/// scenarios materialize bytes; all scenarios are costed by the model. Never
/// touches the cache. Throws StorageError if a donor payload is unavailable and
/// Error if `classification` is not a pseudo-miss.
GenerationOutcome generate(const RequestRecord& req, const Classification& classification, const CostModel& model,
                           const PayloadStore* store = nullptr);

}  // namespace cogent
