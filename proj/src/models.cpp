// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include "cogent/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "cogent/error.hpp"

namespace cogent {

LatencyHistogram::LatencyHistogram(std::vector<std::pair<std::uint64_t, double>> points)
    : points_(std::move(points)) {
  if (points_.empty()) throw ParameterError("latency histogram has no points");
  double total = 0.0;
  double weighted = 0.0;
  cumulative_.reserve(points_.size());
  for (const auto& [lat, w] : points_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("latency histogram weights must be non-negative");
    total += w;
    weighted += w * static_cast<double>(lat);
    cumulative_.push_back(total);
  }
  if (!(total > 0.0)) throw ParameterError("latency histogram total weight must be positive");
  mean_ = weighted / total;
}

LatencyHistogram LatencyHistogram::parse(std::istream& in) {
  std::vector<std::pair<std::uint64_t, double>> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::uint64_t lat = 0;
    double weight = 0.0;
    if (!(fields >> lat)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ParseError(line_no, "latency_us", "expected 'latency_us weight'");
    }
    if (!(fields >> weight)) throw ParseError(line_no, "weight", "expected 'latency_us weight'");
    std::string rest;
    if (fields >> rest) throw ParseError(line_no, "weight", "trailing text '" + rest + "'");
    points.emplace_back(lat, weight);
  }
  return LatencyHistogram(std::move(points));
}

LatencyHistogram LatencyHistogram::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open latency histogram '" + path.string() + "'");
  return parse(in);
}

std::uint64_t LatencyHistogram::sample(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return points_[static_cast<std::size_t>(it - cumulative_.begin())].first;
}

std::int64_t to_micro_cores(double cores) { return std::llround(cores * 1e6); }

CpuModel::CpuModel(double cores, double utilization_cap) : cores_(cores), cap_(utilization_cap) {
  if (!(cores > 0.0) || !std::isfinite(cores)) throw ParameterError("cpu cores must be positive");
  if (!(utilization_cap >= 0.0 && utilization_cap <= 1.0)) {
    throw ParameterError("cpu utilization cap must lie in [0, 1]");
  }
  limit_micro_ = to_micro_cores(cores * utilization_cap);
}

std::int64_t CpuModel::committed_micro(std::uint64_t now) const {
  std::int64_t committed = total_micro_;
  for (auto it = ledger_.begin(); it != ledger_.end() && it->first <= now; ++it) committed -= it->second;
  return committed;
}

double CpuModel::committed(std::uint64_t now) const {
  return static_cast<double>(committed_micro(now)) / 1e6;
}

bool CpuModel::would_admit(std::uint64_t now, std::uint64_t duration, double cores_used) const {
  if (duration == 0) return true;
  return committed_micro(now) + to_micro_cores(cores_used) <= limit_micro_;
}

bool CpuModel::admit(std::uint64_t now, std::uint64_t duration, double cores_used) {
  while (!ledger_.empty() && ledger_.begin()->first <= now) {
    total_micro_ -= ledger_.begin()->second;
    ledger_.erase(ledger_.begin());
  }
  if (!would_admit(now, duration, cores_used)) return false;
  if (duration == 0) return true;
  const std::int64_t micro = to_micro_cores(cores_used);
  ledger_.emplace(now + duration, micro);
  total_micro_ += micro;
  return true;
}

}  // namespace cogent
