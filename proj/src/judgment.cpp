// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include "cogent/judgment.hpp"

#include <algorithm>
#include <map>

#include "cogent/error.hpp"

namespace cogent {
namespace {

// Deterministic donor preference: most recently accessed, then smallest id.
bool fresher(const CacheEntry* a, const CacheEntry* b) {
  if (a->last_access_time != b->last_access_time) return a->last_access_time > b->last_access_time;
  return a->id() < b->id();
}

std::string_view image_format(const ParamSet& params, std::string_view stored) {
  if (const auto fmt = params.get("fmt")) return *fmt;
  return stored;
}

// Everything except the format, so a pure format change can be told apart.
ParamSet shape_only(const ParamSet& params) {
  ParamSet out = params;
  out.erase("fmt");
  return out;
}

std::optional<DonorMatch> best_s1(const RequestRecord& req, const CacheState& cache, const ByteRange& want,
                                  const std::string& req_id) {
  const CacheEntry* best = nullptr;
  for (const CacheEntry* e : cache.entries_with_key(req.key)) {
    if (e->modality != Modality::Block || e->id() == req_id) continue;
    if (!e->range().contains(want)) continue;
    // Smallest covering donor, then freshest.
    if (best == nullptr || e->range().length < best->range().length ||
        (e->range().length == best->range().length && fresher(e, best))) {
      best = e;
    }
  }
  if (best == nullptr) return std::nullopt;
  return DonorMatch{ScenarioKind::Disassemble, {best}, 0};
}

}  // namespace

void ShieldConfig::validate() const {
  if (hamming_threshold < 0 || hamming_threshold > 128) {
    throw ParameterError("hamming threshold must lie in [0, 128]");
  }
}

std::optional<DonorMatch> match_block_prefix(const RequestRecord& req, const CacheState& cache) {
  if (req.modality != Modality::Block) return std::nullopt;
  const ByteRange want = requested_range(req);
  const std::string req_id = object_id(req);

  if (auto s1 = best_s1(req, cache, want, req_id)) return s1;

  // Pieces that sit inside the requested range, grouped by start offset.
  std::map<std::uint64_t, std::vector<const CacheEntry*>> starts;
  for (const CacheEntry* e : cache.entries_with_prefix(key_prefix(req.key))) {
    if (e->id() == req_id) continue;
    const ByteRange r = e->range();
    if (r.length == 0 || r.offset < want.offset || r.end() > want.end()) continue;
    starts[r.offset].push_back(e);
  }
  if (starts.empty() || starts.begin()->first != want.offset) return std::nullopt;

  // completes[pos]: the range [pos, want.end()) can be tiled from here.
  std::map<std::uint64_t, bool> completes;
  completes[want.end()] = true;
  for (auto it = starts.rbegin(); it != starts.rend(); ++it) {
    bool ok = false;
    for (const CacheEntry* e : it->second) {
      const auto c = completes.find(e->range().end());
      if (c != completes.end() && c->second) {
        ok = true;
        break;
      }
    }
    completes[it->first] = ok;
  }
  if (!completes[want.offset]) return std::nullopt;

  // Walk forward in ascending offset, taking the longest piece that still
  // leaves a completable remainder.
  DonorMatch match{ScenarioKind::Combine, {}, 0};
  std::uint64_t pos = want.offset;
  while (pos < want.end()) {
    const CacheEntry* pick = nullptr;
    for (const CacheEntry* e : starts.at(pos)) {
      const auto c = completes.find(e->range().end());
      if (c == completes.end() || !c->second) continue;
      if (pick == nullptr || e->range().length > pick->range().length ||
          (e->range().length == pick->range().length && fresher(e, pick))) {
        pick = e;
      }
    }
    match.donors.push_back(pick);
    pos = pick->range().end();
  }
  // A single piece with exactly the requested range is a plain split.
  if (match.donors.size() == 1) match.scenario = ScenarioKind::Disassemble;
  return match;
}

std::optional<DonorMatch> match_image_similarity(const RequestRecord& req, const CacheState& cache, int threshold) {
  if (req.modality != Modality::Image) return std::nullopt;
  const std::string req_id = object_id(req);

  const CacheEntry* same = nullptr;
  for (const CacheEntry* e : cache.entries_with_content(req.content_id)) {
    if (e->modality != Modality::Image || e->id() == req_id) continue;
    if (same == nullptr || fresher(e, same)) same = e;
  }
  if (same != nullptr) {
    const bool only_format = shape_only(same->params) == shape_only(req.params) &&
                             image_format(same->params, same->format) != image_format(req.params, req.format);
    return DonorMatch{only_format ? ScenarioKind::Reformat : ScenarioKind::Reshape, {same}, 0};
  }

  if (!req.simhash) return std::nullopt;
  const CacheEntry* best = nullptr;
  int best_distance = threshold + 1;
  for (const SimhashSlot& slot : cache.simhash_entries()) {
    const int d = hamming_distance(slot.code, *req.simhash);
    if (d > threshold) continue;
    if (best == nullptr || d < best_distance || (d == best_distance && fresher(slot.entry, best))) {
      if (slot.entry->id() == req_id) continue;
      best = slot.entry;
      best_distance = d;
    }
  }
  if (best == nullptr) return std::nullopt;
  return DonorMatch{ScenarioKind::Revise, {best}, best_distance};
}

Classification classify(const RequestRecord& req, const CacheState& cache, const JudgmentContext& ctx,
                        std::uint64_t now) {
  Classification out;
  if (const CacheEntry* hit = cache.peek(req.key, req.params)) {
    out.kind = Classification::Kind::Hit;
    out.hit = hit;
    return out;
  }

  std::optional<DonorMatch> match;
  if (req.modality == Modality::Block) {
    match = match_block_prefix(req, cache);
  } else if (req.modality == Modality::Image) {
    match = match_image_similarity(req, cache, ctx.shield.hamming_threshold);
  }
  if (!match || !ctx.shield.scenario_enabled[index_of(match->scenario)]) {
    out.kind = Classification::Kind::Miss;
    return out;
  }

  const std::uint64_t gen_us = estimate_latency(ctx.cost, match->scenario, produced_size(req));
  out.match = std::move(match);
  out.estimated_generation_us = gen_us;

  const double fetch_estimate =
      req.origin_latency_override_us
          ? static_cast<double>(ctx.latency.miss_latency(*req.origin_latency_override_us))
          : ctx.latency.expected_miss_us();
  if (ctx.shield.time_check && static_cast<double>(gen_us) > fetch_estimate) {
    out.kind = Classification::Kind::ShieldedMiss;
    out.shield = ShieldReason::TooSlow;
    return out;
  }
  if (ctx.shield.cpu_check && !ctx.cpu.would_admit(now, gen_us, ctx.cost.cpu_cores_per_generation)) {
    out.kind = Classification::Kind::ShieldedMiss;
    out.shield = ShieldReason::NoCpu;
    return out;
  }
  out.kind = Classification::Kind::PseudoMiss;
  return out;
}

}  // namespace cogent
