// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include "cogent/genhit.hpp"

#include <algorithm>
#include <cmath>

#include "cogent/error.hpp"
#include "cogent/judgment.hpp"
#include "cogent/random.hpp"

namespace cogent {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void CostModel::validate() const {
  for (std::size_t i = 0; i < kScenarioCount; ++i) {
    if (!(per_byte_us[i] >= 0.0) || !std::isfinite(per_byte_us[i])) {
      throw ParameterError("per-byte generation cost must be a non-negative number");
    }
  }
  if (!(cpu_cores_per_generation >= 0.0) || !std::isfinite(cpu_cores_per_generation)) {
    throw ParameterError("cpu cores per generation must be non-negative");
  }
}

std::uint64_t estimate_latency(const CostModel& model, ScenarioKind scenario, std::uint64_t size) {
  const std::size_t i = index_of(scenario);
  return model.base_us[i] + static_cast<std::uint64_t>(std::llround(model.per_byte_us[i] * static_cast<double>(size)));
}

std::uint64_t produced_size(const RequestRecord& req) {
  return req.modality == Modality::Block ? requested_range(req).length : req.size;
}

Bytes split_block(std::span<const std::uint8_t> donor, std::uint64_t offset, std::uint64_t length) {
  if (length == 0) throw RangeError("split length must be positive");
  if (offset > donor.size() || length > donor.size() - offset) {
    throw RangeError("split [" + std::to_string(offset) + ", " + std::to_string(offset + length) +
                     ") exceeds donor of " + std::to_string(donor.size()) + " bytes");
  }
  const auto first = donor.begin() + static_cast<std::ptrdiff_t>(offset);
  return Bytes(first, first + static_cast<std::ptrdiff_t>(length));
}

Bytes merge_blocks(std::vector<std::pair<std::uint64_t, Bytes>> parts) {
  if (parts.empty()) throw TilingError(0, "nothing to merge");
  std::stable_sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::uint64_t total = 0;
  for (const auto& [off, bytes] : parts) total += bytes.size();

  Bytes out;
  out.reserve(total);
  std::uint64_t expected = parts.front().first;
  for (const auto& [off, bytes] : parts) {
    if (off > expected) throw TilingError(expected, "gap before part at offset " + std::to_string(off));
    if (off < expected) throw TilingError(off, "part overlaps previous data ending at " + std::to_string(expected));
    if (bytes.empty()) throw TilingError(off, "empty part");
    out.insert(out.end(), bytes.begin(), bytes.end());
    expected = off + bytes.size();
  }
  return out;
}

Bytes SyntheticPayloadStore::bytes_for(std::string_view key, ByteRange range) const {
  const std::uint64_t salt = mix64(seed_ ^ fnv1a(key_prefix(key)));
  Bytes out(range.length);
  for (std::uint64_t i = 0; i < range.length; ++i) {
    const std::uint64_t pos = range.offset + i;
    const std::uint64_t word = mix64(salt + pos / 8);
    out[i] = static_cast<std::uint8_t>(word >> (8 * (pos % 8)));
  }
  return out;
}

std::optional<Bytes> SyntheticPayloadStore::read(const CacheEntry& entry) const {
  if (entry.modality != Modality::Block) return std::nullopt;
  return bytes_for(entry.key, entry.range());
}

std::optional<Bytes> MapPayloadStore::read(const CacheEntry& entry) const {
  const auto it = payloads_.find(entry.id());
  if (it == payloads_.end()) return std::nullopt;
  return it->second;
}

GenerationOutcome generate(const RequestRecord& req, const Classification& classification, const CostModel& model,
                           const PayloadStore* store) {
  if (!classification.is_pseudo_miss() || !classification.match || classification.match->donors.empty()) {
    throw Error("generate() requires a pseudo-miss classification with donors");
  }
  const DonorMatch& match = *classification.match;

  GenerationOutcome out;
  out.scenario = match.scenario;
  out.produced_size = produced_size(req);
  out.latency_us = estimate_latency(model, match.scenario, out.produced_size);
  out.cpu_core_us = static_cast<double>(out.latency_us) * model.cpu_cores_per_generation;

  const bool block_scenario =
      match.scenario == ScenarioKind::Disassemble || match.scenario == ScenarioKind::Combine;
  if (store == nullptr || req.modality != Modality::Block || !block_scenario) return out;

  const ByteRange want = requested_range(req);
  auto load = [&](const CacheEntry& donor) {
    auto bytes = store->read(donor);
    if (!bytes) throw StorageError("no payload for donor '" + donor.id() + "'");
    if (bytes->size() != donor.range().length) {
      throw StorageError("payload for donor '" + donor.id() + "' has " + std::to_string(bytes->size()) +
                         " bytes, expected " + std::to_string(donor.range().length));
    }
    return std::move(*bytes);
  };

  if (match.scenario == ScenarioKind::Disassemble) {
    const CacheEntry& donor = *match.donors.front();
    const Bytes bytes = load(donor);
    out.payload = split_block(bytes, want.offset - donor.range().offset, want.length);
  } else {
    std::vector<std::pair<std::uint64_t, Bytes>> parts;
    parts.reserve(match.donors.size());
    for (const CacheEntry* donor : match.donors) parts.emplace_back(donor->range().offset, load(*donor));
    out.payload = merge_blocks(std::move(parts));
    if (out.payload->size() != want.length) {
      throw TilingError(want.offset + out.payload->size(), "merged donors do not span the requested range");
    }
  }
  return out;
}

}  // namespace cogent
