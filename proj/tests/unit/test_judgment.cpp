// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include <random>

#include "cogent/judgment.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cogent;
using testing::block;
using testing::entry_of;
using testing::image;

namespace {

struct Env {
  CostModel cost;
  LatencyModel latency;
  CpuModel cpu{32.0, 0.6};
  ShieldConfig shield;

  Classification judge(const RequestRecord& r, const CacheState& c, std::uint64_t now = 0) const {
    return classify(r, c, JudgmentContext{cost, latency, cpu, shield}, now);
  }
};

RequestRecord with_hash(RequestRecord r, const SimHash& h) {
  r.simhash = h;
  return r;
}

const SimHash kBase{0x0123456789abcdefULL, 0xfedcba9876543210ULL};

SimHash flips(SimHash h, std::initializer_list<int> bits) {
  for (const int b : bits) h = flip_bit(h, b);
  return h;
}

}  // namespace

TEST_SUITE("judgment") {
  TEST_CASE("exact match is a hit, unrelated is a miss") {
    Env env;
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(block(0, "a/x", 0, 4096)));
    const auto hit = env.judge(block(1, "a/x", 0, 4096), c);
    CHECK(hit.kind == Classification::Kind::Hit);
    REQUIRE(hit.hit != nullptr);
    CHECK(hit.hit->key == "a/x");
    CHECK(env.judge(block(1, "b/x", 0, 4096), c).kind == Classification::Kind::Miss);
  }

  TEST_CASE("S1 splits a covering entry with the same key") {
    Env env;
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(block(0, "a/blk", 0, 1 << 20)));
    const auto j = env.judge(block(1, "a/blk", 4096, 4096), c);
    REQUIRE(j.kind == Classification::Kind::PseudoMiss);
    CHECK(j.match->scenario == ScenarioKind::Disassemble);
    CHECK(j.match->donors.size() == 1);
    CHECK(j.estimated_generation_us == 1000);
    // A range beyond the donor cannot be split out.
    CHECK(env.judge(block(1, "a/blk", (1 << 20) - 10, 4096), c).kind == Classification::Kind::Miss);
  }

  TEST_CASE("S2 combines pieces under the same prefix in offset order") {
    Env env;
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(block(0, "a/p2", 4096, 4096)));
    c.admit(entry_of(block(0, "a/p1", 0, 4096)));
    c.admit(entry_of(block(0, "a/p3", 8192, 4096)));
    const auto j = env.judge(block(1, "a/whole", 0, 12288), c);
    REQUIRE(j.kind == Classification::Kind::PseudoMiss);
    CHECK(j.match->scenario == ScenarioKind::Combine);
    REQUIRE(j.match->donors.size() == 3);
    CHECK(j.match->donors[0]->key == "a/p1");
    CHECK(j.match->donors[1]->key == "a/p2");
    CHECK(j.match->donors[2]->key == "a/p3");
  }

  TEST_CASE("S2 needs an exact tiling") {
    Env env;
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(block(0, "a/p1", 0, 4096)));
    c.admit(entry_of(block(0, "a/p3", 8192, 4096)));
    CHECK(env.judge(block(1, "a/whole", 0, 12288), c).kind == Classification::Kind::Miss);
    // A different prefix never contributes.
    c.admit(entry_of(block(0, "b/p2", 4096, 4096)));
    CHECK(env.judge(block(1, "a/whole", 0, 12288), c).kind == Classification::Kind::Miss);
    // Filling the gap enables the tiling, even next to an overlapping piece.
    c.admit(entry_of(block(0, "a/big", 2048, 8192)));
    CHECK(env.judge(block(1, "a/whole", 0, 12288), c).kind == Classification::Kind::Miss);
    c.admit(entry_of(block(0, "a/p2", 4096, 4096)));
    const auto j = env.judge(block(1, "a/whole", 0, 12288), c);
    REQUIRE(j.kind == Classification::Kind::PseudoMiss);
    CHECK(j.match->donors.size() == 3);
  }

  TEST_CASE("a single exact piece under the prefix is a split") {
    Env env;
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(block(0, "a/other", 0, 4096)));
    const auto j = env.judge(block(1, "a/want", 0, 4096), c);
    REQUIRE(j.kind == Classification::Kind::PseudoMiss);
    CHECK(j.match->scenario == ScenarioKind::Disassemble);
    CHECK(j.match->donors.size() == 1);
  }

  TEST_CASE("S3 reshapes and S4 reformats the same content") {
    Env env;
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(image(0, "p", 1920, 1080, "jpg", 100000)));
    const auto reshape = env.judge(image(1, "p", 960, 540, "jpg", 25000), c);
    REQUIRE(reshape.kind == Classification::Kind::PseudoMiss);
    CHECK(reshape.match->scenario == ScenarioKind::Reshape);
    CHECK(reshape.estimated_generation_us == 40000);
    const auto reformat = env.judge(image(1, "p", 1920, 1080, "webp", 70000), c);
    REQUIRE(reformat.kind == Classification::Kind::PseudoMiss);
    CHECK(reformat.match->scenario == ScenarioKind::Reformat);
    const auto both = env.judge(image(1, "p", 960, 540, "webp", 17000), c);
    REQUIRE(both.kind == Classification::Kind::PseudoMiss);
    CHECK(both.match->scenario == ScenarioKind::Reshape);
  }

  TEST_CASE("S5 picks the nearest simhash within the threshold") {
    Env env;
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(with_hash(image(0, "far", 100, 100, "jpg", 10), flips(kBase, {1, 2, 3, 4, 5, 6, 7}))));
    c.admit(entry_of(with_hash(image(0, "near", 100, 100, "jpg", 10), flips(kBase, {1, 2, 3}))));
    c.admit(entry_of(with_hash(image(0, "out", 100, 100, "jpg", 10), flips(kBase, {1, 2, 3, 4, 5, 6, 7, 8, 9}))));
    const auto j = env.judge(with_hash(image(1, "q", 100, 100, "jpg", 10), kBase), c);
    REQUIRE(j.kind == Classification::Kind::PseudoMiss);
    CHECK(j.match->scenario == ScenarioKind::Revise);
    CHECK(j.match->donors[0]->content_id == "near");
    CHECK(j.match->hamming == 3);
    CHECK(j.estimated_generation_us == 120000);

    CacheState only_far(1 << 30, PolicyKind::Lru);
    only_far.admit(entry_of(with_hash(image(0, "out", 100, 100, "jpg", 10), flips(kBase, {1, 2, 3, 4, 5, 6, 7, 8, 9}))));
    CHECK(env.judge(with_hash(image(1, "q", 100, 100, "jpg", 10), kBase), only_far).kind ==
          Classification::Kind::Miss);
    env.shield.hamming_threshold = 9;
    CHECK(env.judge(with_hash(image(1, "q", 100, 100, "jpg", 10), kBase), only_far).kind ==
          Classification::Kind::PseudoMiss);
  }

  TEST_CASE("S5 ties go to the most recently accessed donor") {
    Env env;
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(with_hash(image(0, "x", 100, 100, "jpg", 10), flips(kBase, {1, 2})), 0));
    c.admit(entry_of(with_hash(image(0, "y", 100, 100, "jpg", 10), flips(kBase, {3, 4})), 5));
    auto j = env.judge(with_hash(image(9, "q", 100, 100, "jpg", 10), kBase), c);
    REQUIRE(j.kind == Classification::Kind::PseudoMiss);
    CHECK(j.match->donors[0]->content_id == "y");
    c.lookup("x/img", image(0, "x", 100, 100, "jpg", 10).params, 8);
    j = env.judge(with_hash(image(9, "q", 100, 100, "jpg", 10), kBase), c);
    CHECK(j.match->donors[0]->content_id == "x");
  }

  TEST_CASE("generation slower than fetching is shielded") {
    Env env;
    env.cost.base_us[index_of(ScenarioKind::Revise)] = 300000;
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(with_hash(image(0, "x", 100, 100, "jpg", 10), flips(kBase, {1}))));
    RequestRecord q = with_hash(image(1, "q", 100, 100, "jpg", 10), kBase);
    auto j = env.judge(q, c);
    CHECK(j.kind == Classification::Kind::ShieldedMiss);
    CHECK(j.shield == ShieldReason::TooSlow);
    REQUIRE(j.match.has_value());
    q.origin_latency_override_us = 500000;
    CHECK(env.judge(q, c).kind == Classification::Kind::PseudoMiss);
    q.origin_latency_override_us.reset();
    env.shield.time_check = false;
    CHECK(env.judge(q, c).kind == Classification::Kind::PseudoMiss);
  }

  TEST_CASE("no CPU headroom is shielded") {
    Env env;
    env.cpu = CpuModel(1.0, 0.6);
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(block(0, "a/blk", 0, 8192)));
    auto j = env.judge(block(1, "a/blk", 0, 4096), c);
    CHECK(j.kind == Classification::Kind::ShieldedMiss);
    CHECK(j.shield == ShieldReason::NoCpu);
    env.cost.cpu_cores_per_generation = 0.5;
    CHECK(env.judge(block(1, "a/blk", 0, 4096), c).kind == Classification::Kind::PseudoMiss);
    env.cost.cpu_cores_per_generation = 1.0;
    env.shield.cpu_check = false;
    CHECK(env.judge(block(1, "a/blk", 0, 4096), c).kind == Classification::Kind::PseudoMiss);
  }

  TEST_CASE("disabled scenarios fall back to a miss") {
    Env env;
    env.shield.scenario_enabled[index_of(ScenarioKind::Disassemble)] = false;
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(block(0, "a/blk", 0, 8192)));
    CHECK(env.judge(block(1, "a/blk", 0, 4096), c).kind == Classification::Kind::Miss);
  }

  TEST_CASE("classification invariants over random caches") {
    Env env;
    std::mt19937_64 rng(8);
    bool ok = true;
    for (int round = 0; round < 300; ++round) {
      CacheState c(1 << 30, PolicyKind::Lru);
      for (int i = 0; i < 12; ++i) {
        const std::uint64_t off = (rng() % 8) * 1024;
        const std::uint64_t len = (1 + rng() % 4) * 1024;
        c.admit(entry_of(block(i, "g/p" + std::to_string(rng() % 6), off, len), i));
      }
      const std::uint64_t off = (rng() % 8) * 1024;
      const std::uint64_t len = (1 + rng() % 6) * 1024;
      const RequestRecord q = block(100, "g/q" + std::to_string(rng() % 3), off, len);
      const auto j = env.judge(q, c);
      if (j.kind != Classification::Kind::PseudoMiss) continue;
      const ByteRange want = requested_range(q);
      std::uint64_t pos = want.offset;
      for (const CacheEntry* d : j.match->donors) ok = ok && c.peek(d->id()) == d;
      if (j.match->scenario == ScenarioKind::Disassemble) {
        ok = ok && j.match->donors.size() == 1 && j.match->donors[0]->range().contains(want);
      } else {
        ok = ok && j.match->donors.size() >= 2;
        for (const CacheEntry* d : j.match->donors) {
          ok = ok && d->range().offset == pos;
          pos = d->range().end();
        }
        ok = ok && pos == want.end();
      }
    }
    CHECK(ok);
  }
}
