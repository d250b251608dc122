// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "cogent/random.hpp"

namespace cogent {

/// Empirical origin-fetch latency distribution: (latency_us, weight) points.
class LatencyHistogram {
 public:
  LatencyHistogram() = default;
  /// Throws ParameterError on empty input or non-positive total weight.
  explicit LatencyHistogram(std::vector<std::pair<std::uint64_t, double>> points);

  /// Text format: one "latency_us weight" pair per line; '#' starts a comment.
  static LatencyHistogram parse(std::istream& in);
  static LatencyHistogram load(const std::filesystem::path& path);

  double mean() const { return mean_; }
  std::uint64_t sample(Rng& rng) const;
  const std::vector<std::pair<std::uint64_t, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<std::uint64_t, double>> points_;
  std::vector<double> cumulative_;
  double mean_ = 0.0;
};

enum class LatencyMode { IdealizedHitZero, Measured };

/// Components of the miss latency T (fetch + write + send) and the pseudo-miss
/// latency T* (judgment + generation + send). Generation comes from CostModel.
struct LatencyModel {
  LatencyMode mode = LatencyMode::Measured;
  std::uint64_t hit_us = 1900;
  std::uint64_t origin_fetch_us = 231070;
  std::uint64_t write_us = 0;
  std::uint64_t miss_send_us = 0;
  std::uint64_t judgment_us = 0;
  std::uint64_t pseudo_send_us = 0;
  std::optional<LatencyHistogram> origin_histogram;

  std::uint64_t hit_latency() const { return mode == LatencyMode::IdealizedHitZero ? 0 : hit_us; }
  std::uint64_t miss_latency(std::uint64_t fetch_us) const { return fetch_us + write_us + miss_send_us; }
  std::uint64_t pseudo_miss_latency(std::uint64_t generation_us) const {
    return judgment_us + generation_us + pseudo_send_us;
  }
  double expected_fetch_us() const {
    return origin_histogram ? origin_histogram->mean() : static_cast<double>(origin_fetch_us);
  }
  double expected_miss_us() const {
    return expected_fetch_us() + static_cast<double>(write_us + miss_send_us);
  }
};

/// CPU capacity ledger. Cores are tracked in integer micro-cores so admission
/// decisions are exact.
class CpuModel {
 public:
  explicit CpuModel(double cores = 32.0, double utilization_cap = 0.60);

  double cores() const { return cores_; }
  double utilization_cap() const { return cap_; }

  /// Whether a reservation of `cores_used` over [now, now + duration) fits
  /// under cores * utilization_cap. Reservations never start in the past, so
  /// committed load over the interval peaks at `now`.
  bool would_admit(std::uint64_t now, std::uint64_t duration, double cores_used) const;
  /// would_admit() plus commit; prunes reservations that ended at or before now.
  bool admit(std::uint64_t now, std::uint64_t duration, double cores_used);

  double committed(std::uint64_t now) const;
  std::size_t active_reservations() const { return ledger_.size(); }

 private:
  std::int64_t committed_micro(std::uint64_t now) const;

  double cores_;
  double cap_;
  std::int64_t limit_micro_;
  std::multimap<std::uint64_t, std::int64_t> ledger_;  // end time -> micro-cores
  std::int64_t total_micro_ = 0;
};

inline bool admit_cpu(CpuModel& cpu, std::uint64_t now, std::uint64_t duration, double cores_used) {
  return cpu.admit(now, duration, cores_used);
}

std::int64_t to_micro_cores(double cores);

}  // namespace cogent
