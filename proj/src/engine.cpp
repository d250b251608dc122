// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include "cogent/engine.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "cogent/error.hpp"
#include "json.hpp"

namespace cogent {

std::string_view to_string(Architecture a) { return a == Architecture::Original ? "original" : "cogent"; }

Architecture parse_architecture(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "original") return Architecture::Original;
  if (lower == "cogent") return Architecture::CoGenT;
  throw ParameterError("unknown architecture '" + std::string(text) + "' (expected original or cogent)");
}

void RunSettings::validate() const {
  if (capacity_bytes == 0) throw ParameterError("cache capacity must be positive");
  if (window_us == 0) throw ParameterError("window length must be positive");
  if (!(cpu_cores > 0.0) || !std::isfinite(cpu_cores)) throw ParameterError("cpu cores must be positive");
  if (!(cpu_utilization_cap > 0.0 && cpu_utilization_cap <= 1.0)) {
    throw ParameterError("cpu utilization cap must lie in (0, 1]");
  }
  cost.validate();
  shield.validate();
}

double SimReport::shielded_fraction() const {
  const std::uint64_t eligible = counters.pseudo_misses + counters.shielded;
  return eligible == 0 ? 0.0 : static_cast<double>(counters.shielded) / static_cast<double>(eligible);
}

double SimReport::two_pronged_rate() const {
  return counters.pseudo_misses == 0
             ? 0.0
             : static_cast<double>(counters.two_pronged_fetches) / static_cast<double>(counters.pseudo_misses);
}

double redundancy_rate(const CacheState& cache) {
  std::unordered_map<std::string_view, std::pair<std::uint64_t, std::uint64_t>> groups;  // total, max
  std::uint64_t total = 0;
  cache.for_each([&](const CacheEntry& e) {
    auto& g = groups[e.content_id];
    g.first += e.size;
    g.second = std::max(g.second, e.size);
    total += e.size;
  });
  if (total == 0) return 0.0;
  std::uint64_t duplicate = 0;
  for (const auto& [id, g] : groups) duplicate += g.first - g.second;
  return static_cast<double>(duplicate) / static_cast<double>(total);
}

namespace {

std::uint64_t nearest_rank(const std::vector<std::uint64_t>& sorted, double p) {
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

}  // namespace

std::uint64_t percentile(std::span<const std::uint64_t> values, double p) {
  if (values.empty()) throw ParameterError("percentile of an empty set");
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("percentile rank must lie in (0, 1)");
  std::vector<std::uint64_t> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return nearest_rank(sorted, p);
}

namespace {

struct PendingFetch {
  std::uint64_t complete_at;
  std::uint64_t seq;
  std::size_t record;
  std::uint64_t fetch_us;
  bool two_pronged;

  bool operator>(const PendingFetch& o) const {
    return complete_at != o.complete_at ? complete_at > o.complete_at : seq > o.seq;
  }
};

class Simulation {
 public:
  Simulation(std::span<const RequestRecord> trace, const RunSettings& s)
      : trace_(trace),
        s_(s),
        cache_(s.capacity_bytes, s.policy),
        cpu_(s.cpu_cores, s.cpu_utilization_cap),
        rng_(s.seed),
        history_(s.frequency_window),
        controller_(s.architecture == Architecture::CoGenT ? s.tree : std::nullopt) {}

  SimReport run() {
    for (std::size_t i = 0; i < trace_.size(); ++i) {
      const RequestRecord& r = trace_[i];
      const bool measured = i >= s_.warmup_requests;
      if (measured) {
        if (!window_open_) {
          window_open_ = true;
          window_start_ = r.timestamp_us;
          first_ts_ = r.timestamp_us;
        } else if (r.timestamp_us >= window_start_ + s_.window_us) {
          const std::uint64_t boundary = window_start_ + s_.window_us;
          complete_until(boundary);
          close_window(boundary);
          window_start_ += (r.timestamp_us - window_start_) / s_.window_us * s_.window_us;
        }
        last_ts_ = r.timestamp_us;
      }
      complete_until(r.timestamp_us);
      serve(i, measured);
    }
    if (window_open_) close_window(last_ts_);
    complete_until(UINT64_MAX);
    return finish();
  }

 private:
  std::uint64_t sample_fetch(const RequestRecord& r) {
    if (r.origin_latency_override_us) return *r.origin_latency_override_us;
    if (s_.latency.origin_histogram) return s_.latency.origin_histogram->sample(rng_);
    return s_.latency.origin_fetch_us;
  }

  void complete_until(std::uint64_t t) {
    while (!pending_.empty() && pending_.top().complete_at <= t) {
      const PendingFetch f = pending_.top();
      pending_.pop();
      const RequestRecord& r = trace_[f.record];
      const std::string id = object_id(r);
      if (const auto it = in_flight_.find(id); it != in_flight_.end() && --it->second == 0) in_flight_.erase(it);
      if (f.two_pronged) controller_.on_fetch_complete(id);
      if (r.size > cache_.capacity()) continue;
      cache_.admit(CacheEntry::from_request(r, f.complete_at, f.fetch_us));
    }
  }

  // Returns the origin fetch latency charged to the request.
  std::uint64_t issue_fetch(std::size_t index, std::uint64_t now, bool two_pronged, RequestEvent& ev,
                            bool measured, std::uint64_t fetch_us) {
    const RequestRecord& r = trace_[index];
    const std::uint64_t complete_at = now + fetch_us + s_.latency.write_us;
    pending_.push(PendingFetch{complete_at, seq_++, index, fetch_us, two_pronged});
    ++in_flight_[object_id(r)];
    ev.fetch_issued = true;
    ev.two_pronged = two_pronged;
    ev.fetch_complete_us = complete_at;
    ev.origin_bytes = r.size;
    if (measured) {
      origin_bytes_ += r.size;
      window_origin_bytes_ += r.size;
      if (r.size > cache_.capacity()) ++counters_.uncacheable;
    }
    return fetch_us;
  }

  void serve(std::size_t index, bool measured) {
    const RequestRecord& r = trace_[index];
    const std::uint64_t now = r.timestamp_us;
    RequestEvent ev;
    ev.index = index;
    ev.timestamp_us = now;

    if (s_.architecture == Architecture::Original) {
      if (cache_.lookup(r.key, r.params, now) != nullptr) {
        ev.kind = Classification::Kind::Hit;
        ev.latency_us = s_.latency.hit_latency();
      } else {
        ev.kind = Classification::Kind::Miss;
        ev.latency_us = s_.latency.miss_latency(issue_fetch(index, now, false, ev, measured, sample_fetch(r)));
      }
    } else {
      const JudgmentContext ctx{s_.cost, s_.latency, cpu_, s_.shield};
      const Classification c = classify(r, cache_, ctx, now);
      ev.kind = c.kind;
      if (c.match) ev.scenario = c.match->scenario;
      ev.shield = c.shield;
      switch (c.kind) {
        case Classification::Kind::Hit:
          cache_.lookup(r.key, r.params, now);
          ev.latency_us = s_.latency.hit_latency();
          break;
        case Classification::Kind::Miss:
        case Classification::Kind::ShieldedMiss:
          ev.latency_us = s_.latency.miss_latency(issue_fetch(index, now, false, ev, measured, sample_fetch(r)));
          break;
        case Classification::Kind::PseudoMiss:
          serve_pseudo_miss(index, c, ev, measured);
          break;
      }
      if (controller_.enabled()) history_.record(r);
    }

    if (!measured) return;
    tally(ev);
    if (s_.record_events) events_.push_back(ev);
  }

  void serve_pseudo_miss(std::size_t index, const Classification& c, RequestEvent& ev, bool measured) {
    const RequestRecord& r = trace_[index];
    const std::uint64_t now = r.timestamp_us;
    std::uint64_t gen_us = c.estimated_generation_us;
    if (s_.payloads != nullptr) gen_us = generate(r, c, s_.cost, s_.payloads).latency_us;
    cpu_.admit(now, gen_us, s_.cost.cpu_cores_per_generation);
    ev.latency_us = s_.latency.pseudo_miss_latency(gen_us);

    if (!controller_.enabled()) return;
    const std::string id = object_id(r);
    if (in_flight_.count(id) > 0) return;
    const std::uint64_t fetch_us = sample_fetch(r);
    const PseudoMissActions actions =
        controller_.on_pseudo_miss(r, history_.features(r, now), now, fetch_us + s_.latency.write_us);
    if (actions.fetch) {
      issue_fetch(index, now, true, ev, measured, fetch_us);
      if (measured) ++counters_.two_pronged_fetches;
    }
  }

  void tally(const RequestEvent& ev) {
    ++counters_.requests;
    switch (ev.kind) {
      case Classification::Kind::Hit:
        ++counters_.hits;
        break;
      case Classification::Kind::Miss:
        ++counters_.misses;
        break;
      case Classification::Kind::PseudoMiss:
        ++counters_.pseudo_misses;
        ++counters_.pseudo_by_scenario[index_of(*ev.scenario)];
        break;
      case Classification::Kind::ShieldedMiss:
        ++counters_.shielded;
        (*ev.shield == ShieldReason::TooSlow ? counters_.shielded_too_slow : counters_.shielded_no_cpu)++;
        break;
    }
    latencies_.push_back(ev.latency_us);
    window_latencies_.push_back(ev.latency_us);
  }

  void close_window(std::uint64_t at) {
    const double rate = redundancy_rate(cache_);
    redundancy_samples_.emplace_back(at, rate);
    if (window_latencies_.empty()) return;
    WindowStats w;
    w.window_start_us = window_start_;
    w.requests = window_latencies_.size();
    double sum = 0.0;
    for (const std::uint64_t l : window_latencies_) sum += static_cast<double>(l);
    w.mean_latency_us = sum / static_cast<double>(w.requests);
    std::sort(window_latencies_.begin(), window_latencies_.end());
    w.p99_us = nearest_rank(window_latencies_, 0.99);
    w.origin_bps = 8.0 * static_cast<double>(window_origin_bytes_) * 1e6 / static_cast<double>(s_.window_us);
    w.redundancy_rate = rate;
    windows_.push_back(w);
    window_latencies_.clear();
    window_origin_bytes_ = 0;
  }

  SimReport finish() {
    SimReport rep;
    rep.counters = counters_;
    rep.origin_bytes = origin_bytes_;
    rep.windows = std::move(windows_);
    rep.redundancy_samples = std::move(redundancy_samples_);
    rep.events = std::move(events_);
    if (latencies_.empty()) return rep;

    double sum = 0.0;
    for (const std::uint64_t l : latencies_) sum += static_cast<double>(l);
    rep.mean_latency_us = sum / static_cast<double>(latencies_.size());
    std::sort(latencies_.begin(), latencies_.end());
    rep.p99_us = nearest_rank(latencies_, 0.99);
    rep.p999_us = nearest_rank(latencies_, 0.999);
    rep.duration_us = last_ts_ - first_ts_;
    rep.origin_bps = 8.0 * static_cast<double>(origin_bytes_) * 1e6 /
                     static_cast<double>(std::max<std::uint64_t>(rep.duration_us, 1));
    double rsum = 0.0;
    for (const auto& [t, rate] : rep.redundancy_samples) rsum += rate;
    rep.redundancy_rate = rsum / static_cast<double>(rep.redundancy_samples.size());
    return rep;
  }

  std::span<const RequestRecord> trace_;
  const RunSettings& s_;
  CacheState cache_;
  CpuModel cpu_;
  Rng rng_;
  AccessHistory history_;
  TwoProngedController controller_;

  std::priority_queue<PendingFetch, std::vector<PendingFetch>, std::greater<>> pending_;
  std::unordered_map<std::string, int> in_flight_;
  std::uint64_t seq_ = 0;

  Counters counters_;
  std::vector<std::uint64_t> latencies_;
  std::vector<RequestEvent> events_;
  std::uint64_t origin_bytes_ = 0;
  std::uint64_t first_ts_ = 0;
  std::uint64_t last_ts_ = 0;

  bool window_open_ = false;
  std::uint64_t window_start_ = 0;
  std::vector<std::uint64_t> window_latencies_;
  std::uint64_t window_origin_bytes_ = 0;
  std::vector<WindowStats> windows_;
  std::vector<std::pair<std::uint64_t, double>> redundancy_samples_;
};

}  // namespace

SimReport run(std::span<const RequestRecord> trace, const RunSettings& settings) {
  settings.validate();
  if (settings.architecture == Architecture::CoGenT && settings.tree &&
      settings.tree->feature_count() != kFeatureCount) {
    throw SchemaError("reuse tree does not match the feature schema");
  }
  return Simulation(trace, settings).run();
}

// ---------------------------------------------------------------------------
// Output

std::string report_json(const SimReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  const Counters& c = r.counters;
  ordered_json by_scenario = ordered_json::object();
  for (const ScenarioKind k : kAllScenarios) by_scenario[std::string(to_string(k))] = c.pseudo_by_scenario[index_of(k)];
  j["requests"] = c.requests;
  j["counters"] = {{"hits", c.hits},
                   {"misses", c.misses},
                   {"pseudo_misses", c.pseudo_misses},
                   {"shielded", c.shielded},
                   {"shielded_too_slow", c.shielded_too_slow},
                   {"shielded_no_cpu", c.shielded_no_cpu},
                   {"two_pronged_fetches", c.two_pronged_fetches},
                   {"uncacheable", c.uncacheable},
                   {"pseudo_by_scenario", by_scenario}};
  j["latency_us"] = {{"mean", r.mean_latency_us}, {"p99", r.p99_us}, {"p999", r.p999_us}};
  j["origin"] = {{"bytes", r.origin_bytes}, {"duration_us", r.duration_us}, {"bps", r.origin_bps}};
  j["shielded_fraction"] = r.shielded_fraction();
  j["two_pronged_rate"] = r.two_pronged_rate();
  j["redundancy_rate"] = r.redundancy_rate;
  ordered_json samples = ordered_json::array();
  for (const auto& [t, rate] : r.redundancy_samples) samples.push_back({t, rate});
  j["redundancy_samples"] = samples;
  ordered_json windows = ordered_json::array();
  for (const WindowStats& w : r.windows) {
    windows.push_back({{"window_start_us", w.window_start_us},
                       {"requests", w.requests},
                       {"mean_latency_us", w.mean_latency_us},
                       {"p99_us", w.p99_us},
                       {"origin_bps", w.origin_bps},
                       {"redundancy_rate", w.redundancy_rate}});
  }
  j["windows"] = windows;
  return j.dump(2) + "\n";
}

std::string series_csv(const SimReport& r) {
  std::ostringstream out;
  out << "window_start_us,mean_latency_us,p99_us,origin_bps,redundancy_rate\n";
  char buf[160];
  for (const WindowStats& w : r.windows) {
    std::snprintf(buf, sizeof buf, "%llu,%.6f,%llu,%.6f,%.9f\n", static_cast<unsigned long long>(w.window_start_us),
                  w.mean_latency_us, static_cast<unsigned long long>(w.p99_us), w.origin_bps, w.redundancy_rate);
    out << buf;
  }
  return out.str();
}

std::string summary_line(const SimReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.3f %.3f %.3f %.6f %.6f", r.mean_latency_us / 1000.0,
                static_cast<double>(r.p99_us) / 1000.0, static_cast<double>(r.p999_us) / 1000.0, r.origin_bps / 1e9,
                r.redundancy_rate);
  return buf;
}

}  // namespace cogent
