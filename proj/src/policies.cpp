// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include "cogent/policies.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <limits>

#include "cogent/error.hpp"

namespace cogent {

CacheEntry CacheEntry::from_request(const RequestRecord& r, std::uint64_t now, std::uint64_t fetch_latency) {
  CacheEntry e;
  e.key = r.key;
  e.params = r.params;
  e.content_id = r.content_id;
  e.size = r.size;
  e.modality = r.modality;
  e.format = r.format;
  e.simhash = r.simhash;
  e.insert_time = now;
  e.last_access_time = now;
  e.access_count = 1;
  e.last_fetch_latency = fetch_latency;
  return e;
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Lru:
      return "lru";
    case PolicyKind::Arc:
      return "arc";
    case PolicyKind::Lhd:
      return "lhd";
    case PolicyKind::LruMad:
      return "lru-mad";
  }
  return "lru";
}

PolicyKind parse_policy(std::string_view name) {
  std::string n;
  for (char c : name) n.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (n == "lru") return PolicyKind::Lru;
  if (n == "arc") return PolicyKind::Arc;
  if (n == "lhd") return PolicyKind::Lhd;
  if (n == "lru-mad" || n == "lrumad") return PolicyKind::LruMad;
  throw ParameterError("unknown policy '" + std::string(name) + "' (expected lru, arc, lhd, lru-mad)");
}

std::unique_ptr<ReplacementPolicy> make_policy(PolicyKind kind, std::uint64_t capacity) {
  switch (kind) {
    case PolicyKind::Lru:
      return std::make_unique<policy::Lru>();
    case PolicyKind::Arc:
      return std::make_unique<policy::Arc>(capacity);
    case PolicyKind::Lhd:
      return std::make_unique<policy::Lhd>();
    case PolicyKind::LruMad:
      return std::make_unique<policy::LruMad>();
  }
  return std::make_unique<policy::Lru>();
}

// ---------------------------------------------------------------------------
// CacheState

CacheState::CacheState(std::uint64_t capacity, PolicyKind kind)
    : CacheState(capacity, make_policy(kind, capacity)) {}

CacheState::CacheState(std::uint64_t capacity, std::unique_ptr<ReplacementPolicy> policy)
    : capacity_(capacity), policy_(std::move(policy)) {}

const CacheEntry* CacheState::lookup(std::string_view key, const ParamSet& params, std::uint64_t now) {
  const std::string id = object_id(key, params);
  const auto it = entries_.find(id);
  if (it == entries_.end()) return nullptr;
  CacheEntry& e = it->second;
  e.last_access_time = std::max(now, e.insert_time);
  ++e.access_count;
  policy_->on_hit(it->first, e);
  return &e;
}

const CacheEntry* CacheState::peek(std::string_view key, const ParamSet& params) const {
  return peek(object_id(key, params));
}

const CacheEntry* CacheState::peek(const std::string& id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<CacheEntry> CacheState::admit(CacheEntry entry) {
  if (entry.size == 0) throw ParameterError("cache entry size must be positive");
  if (entry.size > capacity_) {
    throw CapacityError("object '" + entry.key + "' of " + std::to_string(entry.size) +
                        " bytes exceeds cache capacity " + std::to_string(capacity_));
  }
  entry.last_access_time = std::max(entry.last_access_time, entry.insert_time);
  entry.access_count = std::max<std::uint64_t>(entry.access_count, 1);

  std::string id = entry.id();
  if (const auto it = entries_.find(id); it != entries_.end()) {
    policy_->on_remove(it->first, it->second);
    erase_indexes(it->first, it->second);
    used_ -= it->second.size;
    entries_.erase(it);
  }

  policy_->prepare_admit(id, entry.size);
  std::vector<CacheEntry> victims;
  while (used_ + entry.size > capacity_) {
    victims.push_back(remove(policy_->victim(entry.insert_time)));
  }

  const auto [it, inserted] = entries_.emplace(std::move(id), std::move(entry));
  used_ += it->second.size;
  insert_indexes(it->first, it->second);
  policy_->on_insert(it->first, it->second);
  return victims;
}

std::string CacheState::next_victim(std::uint64_t now) const {
  if (entries_.empty()) throw Error("next_victim on an empty cache");
  return policy_->victim(now);
}

CacheEntry CacheState::remove(const std::string& id) {
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw Error("policy chose victim '" + id + "' which is not cached");
  policy_->on_evict(it->first, it->second);
  erase_indexes(it->first, it->second);
  used_ -= it->second.size;
  CacheEntry out = std::move(it->second);
  entries_.erase(it);
  return out;
}

void CacheState::insert_indexes(const std::string& id, const CacheEntry& entry) {
  by_key_[entry.key].insert(id);
  by_content_[entry.content_id].insert(id);
  if (entry.modality == Modality::Block) by_prefix_[std::string(key_prefix(entry.key))].insert(id);
  if (entry.modality == Modality::Image && entry.simhash) {
    simhash_pos_[id] = simhash_slots_.size();
    simhash_slots_.push_back({*entry.simhash, &entry});
  }
}

void CacheState::erase_indexes(const std::string& id, const CacheEntry& entry) {
  auto drop = [&](auto& index, const std::string& bucket) {
    const auto it = index.find(bucket);
    if (it == index.end()) return;
    it->second.erase(id);
    if (it->second.empty()) index.erase(it);
  };
  drop(by_key_, entry.key);
  drop(by_content_, entry.content_id);
  if (entry.modality == Modality::Block) drop(by_prefix_, std::string(key_prefix(entry.key)));
  if (const auto it = simhash_pos_.find(id); it != simhash_pos_.end()) {
    const std::size_t pos = it->second;
    simhash_pos_.erase(it);
    if (pos + 1 != simhash_slots_.size()) {
      simhash_slots_[pos] = simhash_slots_.back();
      simhash_pos_[simhash_slots_[pos].entry->id()] = pos;
    }
    simhash_slots_.pop_back();
  }
}

std::vector<const CacheEntry*> CacheState::resolve(const std::set<std::string>* ids) const {
  std::vector<const CacheEntry*> out;
  if (ids == nullptr) return out;
  out.reserve(ids->size());
  for (const std::string& id : *ids) out.push_back(&entries_.at(id));
  return out;
}

std::vector<const CacheEntry*> CacheState::entries_with_key(std::string_view key) const {
  const auto it = by_key_.find(std::string(key));
  return resolve(it == by_key_.end() ? nullptr : &it->second);
}

std::vector<const CacheEntry*> CacheState::entries_with_prefix(std::string_view prefix) const {
  const auto it = by_prefix_.find(std::string(prefix));
  return resolve(it == by_prefix_.end() ? nullptr : &it->second);
}

std::vector<const CacheEntry*> CacheState::entries_with_content(std::string_view content_id) const {
  const auto it = by_content_.find(std::string(content_id));
  return resolve(it == by_content_.end() ? nullptr : &it->second);
}

namespace policy {

// ---------------------------------------------------------------------------
// LRU

void Lru::on_insert(const std::string& id, const CacheEntry&) {
  order_.push_front(id);
  pos_[id] = order_.begin();
}

void Lru::on_hit(const std::string& id, const CacheEntry&) {
  const auto it = pos_.find(id);
  if (it == pos_.end()) return;
  order_.splice(order_.begin(), order_, it->second);
}

void Lru::on_evict(const std::string& id, const CacheEntry&) {
  const auto it = pos_.find(id);
  if (it == pos_.end()) return;
  order_.erase(it->second);
  pos_.erase(it);
}

std::string Lru::victim(std::uint64_t) const {
  if (order_.empty()) throw Error("LRU victim requested on empty cache");
  return order_.back();
}

// ---------------------------------------------------------------------------
// ARC

void Arc::List::push_front(const std::string& id, std::uint64_t size) {
  items.emplace_front(id, size);
  pos[id] = items.begin();
  bytes += size;
}

std::uint64_t Arc::List::erase(const std::string& id) {
  const auto it = pos.find(id);
  if (it == pos.end()) return 0;
  const std::uint64_t size = it->second->second;
  items.erase(it->second);
  pos.erase(it);
  bytes -= size;
  return size;
}

void Arc::List::pop_back() {
  const auto& [id, size] = items.back();
  bytes -= size;
  pos.erase(id);
  items.pop_back();
}

void Arc::prepare_admit(const std::string& id, std::uint64_t size) {
  incoming_to_t2_ = false;
  incoming_from_b2_ = false;
  const double c = static_cast<double>(capacity_);
  const double s = static_cast<double>(size);
  if (b1_.contains(id)) {
    const double ratio = b1_.bytes > 0 ? static_cast<double>(b2_.bytes) / static_cast<double>(b1_.bytes) : 1.0;
    p_ = std::min(c, p_ + s * std::max(ratio, 1.0));
    b1_.erase(id);
    incoming_to_t2_ = true;
  } else if (b2_.contains(id)) {
    const double ratio = b2_.bytes > 0 ? static_cast<double>(b1_.bytes) / static_cast<double>(b2_.bytes) : 1.0;
    p_ = std::max(0.0, p_ - s * std::max(ratio, 1.0));
    b2_.erase(id);
    incoming_to_t2_ = true;
    incoming_from_b2_ = true;
  } else if (t1_.bytes + b1_.bytes + size > capacity_) {
    while (!b1_.items.empty() && t1_.bytes + b1_.bytes + size > capacity_) b1_.pop_back();
  } else {
    while (!b2_.items.empty() && t1_.bytes + t2_.bytes + b1_.bytes + b2_.bytes + size > 2 * capacity_) {
      b2_.pop_back();
    }
  }
}

void Arc::on_insert(const std::string& id, const CacheEntry& entry) {
  (incoming_to_t2_ ? t2_ : t1_).push_front(id, entry.size);
  incoming_to_t2_ = false;
  incoming_from_b2_ = false;
  trim_ghosts();
}

void Arc::on_hit(const std::string& id, const CacheEntry& entry) {
  if (t1_.erase(id) == 0) t2_.erase(id);
  t2_.push_front(id, entry.size);
}

void Arc::on_evict(const std::string& id, const CacheEntry& entry) {
  if (t1_.erase(id) > 0) {
    b1_.push_front(id, entry.size);
  } else if (t2_.erase(id) > 0) {
    b2_.push_front(id, entry.size);
  }
  trim_ghosts();
}

void Arc::on_remove(const std::string& id, const CacheEntry&) {
  if (t1_.erase(id) == 0) t2_.erase(id);
}

std::string Arc::victim(std::uint64_t) const {
  const double t1 = static_cast<double>(t1_.bytes);
  const bool take_t1 = !t1_.items.empty() &&
                       (t2_.items.empty() || t1 > p_ || (incoming_from_b2_ && t1 >= p_));
  if (take_t1) return t1_.items.back().first;
  if (t2_.items.empty()) throw Error("ARC victim requested on empty cache");
  return t2_.items.back().first;
}

void Arc::trim_ghosts() {
  while (!b1_.items.empty() && t1_.bytes + b1_.bytes > capacity_) b1_.pop_back();
  auto total = [&] { return t1_.bytes + t2_.bytes + b1_.bytes + b2_.bytes; };
  while (!b2_.items.empty() && total() > 2 * capacity_) b2_.pop_back();
  while (!b1_.items.empty() && total() > 2 * capacity_) b1_.pop_back();
}

// ---------------------------------------------------------------------------
// LHD

namespace {
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Bin 0 holds age 0; bin b >= 1 holds ages [2^(b-1), 2^b).
std::uint64_t bin_low(int b) { return b == 0 ? 0 : std::uint64_t{1} << (b - 1); }
std::uint64_t bin_high(int b) { return b == 0 ? 0 : (std::uint64_t{1} << b) - 1; }
std::uint64_t bin_width(int b) { return b == 0 ? 1 : std::uint64_t{1} << (b - 1); }
}  // namespace

std::vector<double> Lhd::initial_density() {
  // Without statistics, rank like LRU: density falls with age.
  std::vector<double> d(kBins);
  for (int b = 0; b < kBins; ++b) d[b] = 1.0 / static_cast<double>(bin_high(b) + 1);
  return d;
}

int Lhd::age_bin(std::uint64_t age) {
  return std::min<int>(static_cast<int>(std::bit_width(age)), kBins - 1);
}

std::uint64_t Lhd::age(const std::string& id) const {
  return tick_ - tags_.at(id).last_tick;
}

double Lhd::rank(const std::string& id) const {
  const Tag& tag = tags_.at(id);
  return density_[age_bin(tick_ - tag.last_tick)] / static_cast<double>(tag.size);
}

void Lhd::advance() {
  ++tick_;
  if (tick_ % kEpoch == 0) reconfigure();
}

void Lhd::reconfigure() {
  double events_above = 0.0;
  double hits_above = 0.0;
  double lifetime = 0.0;
  std::vector<double> fresh(kBins, 0.0);
  for (int b = kBins - 1; b >= 0; --b) {
    events_above += hits_[b] + evictions_[b];
    hits_above += hits_[b];
    lifetime += events_above * static_cast<double>(bin_width(b));
    fresh[b] = lifetime > 0.0 ? hits_above / lifetime : 0.0;
  }
  if (events_above > 0.0) density_ = std::move(fresh);
  for (int b = 0; b < kBins; ++b) {
    hits_[b] *= kDecay;
    evictions_[b] *= kDecay;
  }
}

void Lhd::on_insert(const std::string& id, const CacheEntry& entry) {
  advance();
  auto [it, inserted] = tags_.try_emplace(id);
  if (!inserted) vacate(it->second);
  it->second.size = entry.size;
  it->second.last_tick = tick_;
  place(it->first, it->second);
}

void Lhd::on_hit(const std::string& id, const CacheEntry&) {
  const auto it = tags_.find(id);
  if (it == tags_.end()) return;
  hits_[age_bin(tick_ - it->second.last_tick)] += 1.0;
  advance();
  vacate(it->second);
  it->second.last_tick = tick_;
  place(it->first, it->second);
}

void Lhd::on_evict(const std::string& id, const CacheEntry&) {
  const auto it = tags_.find(id);
  if (it == tags_.end()) return;
  evictions_[age_bin(tick_ - it->second.last_tick)] += 1.0;
  vacate(it->second);
  tags_.erase(it);
}

void Lhd::on_remove(const std::string& id, const CacheEntry&) {
  const auto it = tags_.find(id);
  if (it == tags_.end()) return;
  vacate(it->second);
  tags_.erase(it);
}

std::size_t Lhd::better(std::size_t a, std::size_t b) const {
  if (a == kNone) return b;
  if (b == kNone) return a;
  if (slot_size_[a] != slot_size_[b]) return slot_size_[a] > slot_size_[b] ? a : b;
  return std::min(a, b);
}

void Lhd::rebuild_tree() {
  tree_.assign(2 * leaves_, kNone);
  for (std::size_t s = 0; s < slot_size_.size(); ++s) {
    if (slot_size_[s] > 0) tree_[leaves_ + s] = static_cast<std::uint32_t>(s);
  }
  for (std::size_t n = leaves_ - 1; n >= 1; --n) {
    tree_[n] = static_cast<std::uint32_t>(better(tree_[2 * n], tree_[2 * n + 1]));
  }
}

void Lhd::compact() {
  std::vector<std::uint64_t> ticks;
  std::vector<std::uint64_t> sizes;
  std::vector<const std::string*> ids;
  for (std::size_t s = 0; s < slot_size_.size(); ++s) {
    if (slot_size_[s] == 0) continue;
    tags_.at(*slot_id_[s]).slot = ticks.size();
    ticks.push_back(slot_tick_[s]);
    sizes.push_back(slot_size_[s]);
    ids.push_back(slot_id_[s]);
  }
  slot_tick_ = std::move(ticks);
  slot_size_ = std::move(sizes);
  slot_id_ = std::move(ids);
}

void Lhd::place(const std::string& id, Tag& tag) {
  if (slot_size_.size() == leaves_) {
    if (live_ * 2 < slot_size_.size()) compact();
    leaves_ = std::max<std::size_t>(1024, std::bit_ceil(std::max<std::size_t>(2 * (live_ + 1), slot_size_.size() + 1)));
    rebuild_tree();
  }
  tag.slot = slot_size_.size();
  slot_tick_.push_back(tag.last_tick);
  slot_size_.push_back(tag.size);
  slot_id_.push_back(&id);
  ++live_;
  std::size_t n = leaves_ + tag.slot;
  tree_[n] = static_cast<std::uint32_t>(tag.slot);
  for (n /= 2; n >= 1; n /= 2) tree_[n] = static_cast<std::uint32_t>(better(tree_[2 * n], tree_[2 * n + 1]));
}

void Lhd::vacate(const Tag& tag) {
  slot_size_[tag.slot] = 0;
  slot_id_[tag.slot] = nullptr;
  --live_;
  std::size_t n = leaves_ + tag.slot;
  tree_[n] = kNone;
  for (n /= 2; n >= 1; n /= 2) tree_[n] = static_cast<std::uint32_t>(better(tree_[2 * n], tree_[2 * n + 1]));
}

std::size_t Lhd::best_in(std::size_t lo, std::size_t hi) const {
  std::size_t best = kNone;
  for (lo += leaves_, hi += leaves_; lo < hi; lo /= 2, hi /= 2) {
    if (lo & 1) best = better(best, tree_[lo++]);
    if (hi & 1) best = better(best, tree_[--hi]);
  }
  return best;
}

std::string Lhd::victim(std::uint64_t) const {
  if (live_ == 0) throw Error("LHD victim requested on empty cache");
  std::size_t chosen = kNone;
  double chosen_rank = 0.0;
  for (int b = 0; b < kBins; ++b) {
    const std::uint64_t lo_age = bin_low(b);
    if (lo_age > tick_) break;
    const std::uint64_t hi_age = b == kBins - 1 ? tick_ : std::min(bin_high(b), tick_);
    // Ages [lo_age, hi_age] are last ticks [tick - hi_age, tick - lo_age].
    const std::uint64_t first_tick = tick_ - hi_age;
    const std::uint64_t last_tick = tick_ - lo_age;
    const auto lo = std::lower_bound(slot_tick_.begin(), slot_tick_.end(), first_tick) - slot_tick_.begin();
    const auto hi = std::upper_bound(slot_tick_.begin(), slot_tick_.end(), last_tick) - slot_tick_.begin();
    if (lo >= hi) continue;
    const std::size_t cand = best_in(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
    if (cand == kNone) continue;
    const double r = density_[b] / static_cast<double>(slot_size_[cand]);
    if (chosen == kNone || r < chosen_rank || (r == chosen_rank && slot_tick_[cand] < slot_tick_[chosen])) {
      chosen = cand;
      chosen_rank = r;
    }
  }
  return *slot_id_[chosen];
}

// ---------------------------------------------------------------------------
// LRU-MAD

double LruMad::delay_saved(const CacheEntry& entry, std::uint64_t now) {
  const std::uint64_t since = now > entry.insert_time ? now - entry.insert_time : 0;
  const double hit_rate = static_cast<double>(entry.access_count) / static_cast<double>(since + 1);
  return hit_rate * static_cast<double>(entry.last_fetch_latency);
}

void LruMad::on_insert(const std::string& id, const CacheEntry& entry) {
  Lru::on_insert(id, entry);
  entries_[id] = &entry;
}

void LruMad::on_hit(const std::string& id, const CacheEntry& entry) {
  Lru::on_hit(id, entry);
  entries_[id] = &entry;
}

void LruMad::on_evict(const std::string& id, const CacheEntry& entry) {
  Lru::on_evict(id, entry);
  entries_.erase(id);
}

std::string LruMad::victim(std::uint64_t now) const {
  if (order_.empty()) throw Error("LRU-MAD victim requested on empty cache");
  auto it = order_.rbegin();
  const std::string* best = &*it;
  double best_score = delay_saved(*entries_.at(*it), now);
  std::size_t seen = 1;
  for (++it; it != order_.rend() && seen < kWindow; ++it, ++seen) {
    const double score = delay_saved(*entries_.at(*it), now);
    if (score < best_score) {
      best = &*it;
      best_score = score;
    }
  }
  return *best;
}

}  // namespace policy
}  // namespace cogent
