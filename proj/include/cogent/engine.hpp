// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cogent/controller.hpp"
#include "cogent/genhit.hpp"
#include "cogent/judgment.hpp"
#include "cogent/models.hpp"
#include "cogent/policies.hpp"
#include "cogent/trace.hpp"

namespace cogent {

enum class Architecture { Original, CoGenT };

std::string_view to_string(Architecture a);
/// Accepts "original" or "cogent", case-insensitive.
Architecture parse_architecture(std::string_view text);

struct RunSettings {
  Architecture architecture = Architecture::CoGenT;
  PolicyKind policy = PolicyKind::Lru;
  std::uint64_t capacity_bytes = 1ULL << 30;
  LatencyModel latency;
  CostModel cost;
  double cpu_cores = 32.0;
  double cpu_utilization_cap = 0.60;
  ShieldConfig shield;
  std::optional<DecisionTree> tree;  // two-pronged fetching on iff present (CoGenT only)
  std::uint64_t seed = 1;            // origin latency sampling
  std::uint64_t window_us = 1'000'000;
  std::uint64_t warmup_requests = 0;  // leading requests replayed but not measured
  std::uint64_t frequency_window = 10000;
  const PayloadStore* payloads = nullptr;  // payload mode for block generation
  bool record_events = false;

  /// Throws ParameterError on an invalid combination.
  void validate() const;
};

/// One measured request, in trace order.
struct RequestEvent {
  std::uint64_t index = 0;  // position in the trace
  std::uint64_t timestamp_us = 0;
  Classification::Kind kind = Classification::Kind::Miss;
  std::optional<ScenarioKind> scenario;  // pseudo-miss and shielded miss
  std::optional<ShieldReason> shield;
  std::uint64_t latency_us = 0;
  std::uint64_t origin_bytes = 0;         // fetched on behalf of this request
  bool fetch_issued = false;              // miss fetch or two-pronged fetch
  bool two_pronged = false;
  std::uint64_t fetch_complete_us = 0;

  friend bool operator==(const RequestEvent&, const RequestEvent&) = default;
};

struct Counters {
  std::uint64_t requests = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t pseudo_misses = 0;
  std::uint64_t shielded = 0;
  std::uint64_t shielded_too_slow = 0;
  std::uint64_t shielded_no_cpu = 0;
  std::uint64_t two_pronged_fetches = 0;
  std::uint64_t uncacheable = 0;
  std::array<std::uint64_t, kScenarioCount> pseudo_by_scenario{};

  friend bool operator==(const Counters&, const Counters&) = default;
};

struct WindowStats {
  std::uint64_t window_start_us = 0;
  std::uint64_t requests = 0;
  double mean_latency_us = 0.0;
  std::uint64_t p99_us = 0;
  double origin_bps = 0.0;
  double redundancy_rate = 0.0;

  friend bool operator==(const WindowStats&, const WindowStats&) = default;
};

struct SimReport {
  Counters counters;
  double mean_latency_us = 0.0;
  std::uint64_t p99_us = 0;
  std::uint64_t p999_us = 0;
  std::uint64_t origin_bytes = 0;
  std::uint64_t duration_us = 0;
  double origin_bps = 0.0;
  double redundancy_rate = 0.0;  // mean over window samples
  std::vector<std::pair<std::uint64_t, double>> redundancy_samples;
  std::vector<WindowStats> windows;
  std::vector<RequestEvent> events;  // when requested

  /// Shielded share of all pseudo-miss-eligible requests.
  double shielded_fraction() const;
  /// Two-pronged fetches per pseudo-miss.
  double two_pronged_rate() const;
};

/// Replays `trace` through one cache configuration.
SimReport run(std::span<const RequestRecord> trace, const RunSettings& settings);

/// (sum over content groups of group bytes - largest entry in group) / cached bytes.
double redundancy_rate(const CacheState& cache);

/// Nearest-rank percentile: sorted value at 1-based index ceil(p * n). Throws
/// ParameterError for empty input or p outside (0, 1).
std::uint64_t percentile(std::span<const std::uint64_t> values, double p);

/// Report as a JSON document (ordered keys, stable output).
std::string report_json(const SimReport& report);
/// `window_start_us,mean_latency_us,p99_us,origin_bps,redundancy_rate` rows.
std::string series_csv(const SimReport& report);
/// `mean_ms p99_ms p999_ms origin_gbps redundancy`.
std::string summary_line(const SimReport& report);

}  // namespace cogent
