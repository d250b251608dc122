// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cogent/genhit.hpp"
#include "cogent/models.hpp"
#include "cogent/policies.hpp"
#include "cogent/scenario.hpp"
#include "cogent/trace.hpp"

namespace cogent {

enum class ShieldReason { TooSlow, NoCpu };

constexpr std::string_view to_string(ShieldReason r) { return r == ShieldReason::TooSlow ? "TooSlow" : "NoCpu"; }

struct ShieldConfig {
  int hamming_threshold = 8;
  std::array<bool, kScenarioCount> scenario_enabled = {true, true, true, true, true};
  bool cpu_check = true;
  bool time_check = true;

  /// Throws ParameterError unless 0 <= hamming_threshold <= 128.
  void validate() const;
};

/// A donor set and the scenario it supports.
struct DonorMatch {
  ScenarioKind scenario = ScenarioKind::Disassemble;
  std::vector<const CacheEntry*> donors;  // S2: ascending offset order
  int hamming = 0;                        // S5 only
};

struct Classification {
  enum class Kind { Hit, Miss, PseudoMiss, ShieldedMiss };

  Kind kind = Kind::Miss;
  const CacheEntry* hit = nullptr;           // Hit
  std::optional<DonorMatch> match;           // PseudoMiss, and ShieldedMiss for reporting
  std::optional<ShieldReason> shield;        // ShieldedMiss
  std::uint64_t estimated_generation_us = 0;  // PseudoMiss / ShieldedMiss

  bool is_pseudo_miss() const { return kind == Kind::PseudoMiss; }
};

constexpr std::string_view to_string(Classification::Kind k) {
  switch (k) {
    case Classification::Kind::Hit:
      return "hit";
    case Classification::Kind::Miss:
      return "miss";
    case Classification::Kind::PseudoMiss:
      return "pseudo_miss";
    case Classification::Kind::ShieldedMiss:
      return "shielded_miss";
  }
  return "miss";
}

/// Block donor search. S1: one cached entry with the identical key whose range
/// covers the request. S2: entries under the same `content_id/` prefix that
/// exactly tile the request, no gaps or overlaps, returned in offset order.
std::optional<DonorMatch> match_block_prefix(const RequestRecord& req, const CacheState& cache);

/// Image donor search. Same content_id first (S3 when dimensions / quality
/// differ, S4 when only the format differs); otherwise the minimum-Hamming
/// simhash donor within `threshold` (S5). Ties go to the most recently accessed.
std::optional<DonorMatch> match_image_similarity(const RequestRecord& req, const CacheState& cache, int threshold);

/// Everything classify() needs to decide shielding; read-only.
struct JudgmentContext {
  const CostModel& cost;
  const LatencyModel& latency;
  const CpuModel& cpu;
  const ShieldConfig& shield;
};

/// Three-way judgment with shielding. Never mutates the cache: a Hit carries
/// the entry, the caller refreshes recency through CacheState::lookup.
Classification classify(const RequestRecord& req, const CacheState& cache, const JudgmentContext& ctx,
                        std::uint64_t now);

}  // namespace cogent
