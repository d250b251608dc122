// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cogent/trace.hpp"

namespace cogent {

struct CacheEntry {
  std::string key;
  ParamSet params;
  std::string content_id;
  std::uint64_t size = 0;
  Modality modality = Modality::Other;
  std::string format;
  std::optional<SimHash> simhash;
  std::uint64_t insert_time = 0;
  std::uint64_t last_access_time = 0;
  std::uint64_t access_count = 1;
  std::uint64_t last_fetch_latency = 0;

  std::string id() const { return object_id(key, params); }
  ByteRange range() const { return requested_range(params, size); }

  static CacheEntry from_request(const RequestRecord& r, std::uint64_t now, std::uint64_t fetch_latency);
};

enum class PolicyKind { Lru, Arc, Lhd, LruMad };

std::string_view to_string(PolicyKind kind);
/// Accepts lru, arc, lhd, lru-mad (case-insensitive, '_' allowed for '-').
PolicyKind parse_policy(std::string_view name);

/// Policy-private bookkeeping. CacheState owns entries and byte accounting; a
/// policy only orders them. Every id passed in is an object_id().
class ReplacementPolicy {
 public:
  virtual ~ReplacementPolicy() = default;

  // Called before victims are chosen for an incoming object.
  virtual void prepare_admit(const std::string& /*id*/, std::uint64_t /*size*/) {}
  virtual void on_insert(const std::string& id, const CacheEntry& entry) = 0;
  virtual void on_hit(const std::string& id, const CacheEntry& entry) = 0;
  virtual void on_evict(const std::string& id, const CacheEntry& entry) = 0;
  // Removal that is not an eviction (the object is being replaced in place).
  virtual void on_remove(const std::string& id, const CacheEntry& entry) { on_evict(id, entry); }

  virtual std::string victim(std::uint64_t now) const = 0;
};

std::unique_ptr<ReplacementPolicy> make_policy(PolicyKind kind, std::uint64_t capacity);

struct SimhashSlot {
  SimHash code;
  const CacheEntry* entry;
};

/// Byte-capacity cache with an exact (key, canonical params) index and the
/// secondary indexes the pseudo-miss judgment needs.
class CacheState {
 public:
  CacheState(std::uint64_t capacity, PolicyKind kind);
  CacheState(std::uint64_t capacity, std::unique_ptr<ReplacementPolicy> policy);

  CacheState(CacheState&&) noexcept = default;
  CacheState& operator=(CacheState&&) noexcept = default;

  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t used() const { return used_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Exact lookup. A hit refreshes recency/frequency and notifies the policy;
  /// a miss leaves the state untouched.
  const CacheEntry* lookup(std::string_view key, const ParamSet& params, std::uint64_t now);

  /// Read-only exact lookup without policy side effects.
  const CacheEntry* peek(std::string_view key, const ParamSet& params) const;
  const CacheEntry* peek(const std::string& id) const;

  /// Inserts `entry`, evicting per policy until it fits. An entry with the same
  /// id is replaced in place (not reported as a victim). Throws CapacityError
  /// when entry.size exceeds the capacity, leaving the state unchanged.
  std::vector<CacheEntry> admit(CacheEntry entry);

  /// Key of the entry the policy would evict next. Throws Error when empty.
  std::string next_victim(std::uint64_t now) const;

  std::vector<const CacheEntry*> entries_with_key(std::string_view key) const;
  std::vector<const CacheEntry*> entries_with_prefix(std::string_view prefix) const;
  std::vector<const CacheEntry*> entries_with_content(std::string_view content_id) const;
  std::span<const SimhashSlot> simhash_entries() const { return simhash_slots_; }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [id, entry] : entries_) fn(entry);
  }

  const ReplacementPolicy& policy() const { return *policy_; }

 private:
  void insert_indexes(const std::string& id, const CacheEntry& entry);
  void erase_indexes(const std::string& id, const CacheEntry& entry);
  CacheEntry remove(const std::string& id);
  std::vector<const CacheEntry*> resolve(const std::set<std::string>* ids) const;

  std::uint64_t capacity_;
  std::uint64_t used_ = 0;
  std::unique_ptr<ReplacementPolicy> policy_;
  std::unordered_map<std::string, CacheEntry> entries_;
  std::unordered_map<std::string, std::set<std::string>> by_key_;
  std::unordered_map<std::string, std::set<std::string>> by_prefix_;
  std::unordered_map<std::string, std::set<std::string>> by_content_;
  std::vector<SimhashSlot> simhash_slots_;
  std::unordered_map<std::string, std::size_t> simhash_pos_;
};

// Policy implementations, exposed for white-box tests.
namespace policy {

class Lru : public ReplacementPolicy {
 public:
  void on_insert(const std::string& id, const CacheEntry& entry) override;
  void on_hit(const std::string& id, const CacheEntry& entry) override;
  void on_evict(const std::string& id, const CacheEntry& entry) override;
  std::string victim(std::uint64_t now) const override;

  // Most recent first.
  std::vector<std::string> order() const { return {order_.begin(), order_.end()}; }

 protected:
  std::list<std::string> order_;  // front = most recent
  std::unordered_map<std::string, std::list<std::string>::iterator> pos_;
};

/// Adaptive replacement cache, byte-weighted: T1/T2 hold resident objects seen
/// once/more than once, B1/B2 their ghosts, and the T1 target p moves in bytes.
class Arc : public ReplacementPolicy {
 public:
  explicit Arc(std::uint64_t capacity) : capacity_(capacity) {}

  void prepare_admit(const std::string& id, std::uint64_t size) override;
  void on_insert(const std::string& id, const CacheEntry& entry) override;
  void on_hit(const std::string& id, const CacheEntry& entry) override;
  void on_evict(const std::string& id, const CacheEntry& entry) override;
  void on_remove(const std::string& id, const CacheEntry& entry) override;
  std::string victim(std::uint64_t now) const override;

  struct Sizes {
    std::uint64_t t1 = 0, t2 = 0, b1 = 0, b2 = 0;
  };
  Sizes sizes() const { return {t1_.bytes, t2_.bytes, b1_.bytes, b2_.bytes}; }
  double target_t1() const { return p_; }

 private:
  struct List {
    std::list<std::pair<std::string, std::uint64_t>> items;  // front = MRU
    std::unordered_map<std::string, std::list<std::pair<std::string, std::uint64_t>>::iterator> pos;
    std::uint64_t bytes = 0;

    bool contains(const std::string& id) const { return pos.count(id) > 0; }
    void push_front(const std::string& id, std::uint64_t size);
    std::uint64_t erase(const std::string& id);
    void pop_back();
  };

  void trim_ghosts();

  std::uint64_t capacity_;
  double p_ = 0.0;
  List t1_, t2_, b1_, b2_;
  bool incoming_to_t2_ = false;
  bool incoming_from_b2_ = false;
};

/// Least hit density over power-of-two age bins (ages in policy ticks, one tick
/// per insert or hit). Bin statistics decay by 0.9 every 10^4 ticks.
class Lhd : public ReplacementPolicy {
 public:
  static constexpr int kBins = 40;
  static constexpr std::uint64_t kEpoch = 10000;
  static constexpr double kDecay = 0.9;

  void on_insert(const std::string& id, const CacheEntry& entry) override;
  void on_hit(const std::string& id, const CacheEntry& entry) override;
  void on_evict(const std::string& id, const CacheEntry& entry) override;
  void on_remove(const std::string& id, const CacheEntry& entry) override;
  std::string victim(std::uint64_t now) const override;

  static int age_bin(std::uint64_t age);
  /// Expected hits per byte-tick for the given resident entry.
  double rank(const std::string& id) const;
  double density(int bin) const { return density_[bin]; }
  std::uint64_t ticks() const { return tick_; }
  std::uint64_t age(const std::string& id) const;

 private:
  struct Tag {
    std::uint64_t last_tick = 0;
    std::uint64_t size = 0;
    std::size_t slot = 0;
  };

  void advance();
  void reconfigure();
  void place(const std::string& id, Tag& tag);
  void vacate(const Tag& tag);
  void compact();
  void rebuild_tree();
  std::size_t better(std::size_t a, std::size_t b) const;
  std::size_t best_in(std::size_t lo, std::size_t hi) const;

  std::uint64_t tick_ = 0;
  std::unordered_map<std::string, Tag> tags_;
  std::vector<double> hits_ = std::vector<double>(kBins, 0.0);
  std::vector<double> evictions_ = std::vector<double>(kBins, 0.0);
  std::vector<double> density_ = initial_density();

  // Slots are handed out in touch order, so slot order is recency order. A
  // max-tree over slots finds the largest (lowest rank) entry in an age band.
  std::vector<std::uint64_t> slot_tick_;
  std::vector<std::uint64_t> slot_size_;  // 0 = vacant
  std::vector<const std::string*> slot_id_;
  std::vector<std::uint32_t> tree_;
  std::size_t leaves_ = 0;
  std::size_t live_ = 0;

  static std::vector<double> initial_density();
};

/// LRU candidates ranked by expected delay saved:
/// (access_count / (now - insert_time + 1)) * last_fetch_latency, evaluated over
/// the kWindow least-recent entries.
class LruMad : public Lru {
 public:
  static constexpr std::size_t kWindow = 64;
  std::string victim(std::uint64_t now) const override;
  void on_insert(const std::string& id, const CacheEntry& entry) override;
  void on_hit(const std::string& id, const CacheEntry& entry) override;
  void on_evict(const std::string& id, const CacheEntry& entry) override;

  static double delay_saved(const CacheEntry& entry, std::uint64_t now);

 private:
  std::unordered_map<std::string, const CacheEntry*> entries_;
};

}  // namespace policy
}  // namespace cogent
