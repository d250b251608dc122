// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include <random>

#include "cogent/error.hpp"
#include "cogent/genhit.hpp"
#include "cogent/judgment.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cogent;
using testing::block;
using testing::entry_of;
using testing::image;

namespace {

Bytes text(const char* s) { return Bytes(s, s + std::char_traits<char>::length(s)); }

Classification judge(const RequestRecord& r, const CacheState& c) {
  static const CostModel cost;
  static const LatencyModel latency;
  static const CpuModel cpu;
  static const ShieldConfig shield;
  return classify(r, c, JudgmentContext{cost, latency, cpu, shield}, r.timestamp_us);
}

}  // namespace

TEST_SUITE("genhit") {
  TEST_CASE("split returns the requested slice") {
    const Bytes d = text("abcdef");
    CHECK(split_block(d, 2, 3) == text("cde"));
    CHECK(split_block(d, 0, 6) == d);
    CHECK_THROWS_AS(split_block(d, 4, 3), RangeError);
    CHECK_THROWS_AS(split_block(d, 7, 1), RangeError);
    CHECK_THROWS_AS(split_block(d, 0, 0), RangeError);
  }

  TEST_CASE("merge sorts internally and reports the first bad boundary") {
    CHECK(merge_blocks({{0, text("ab")}, {2, text("cd")}}) == text("abcd"));
    CHECK(merge_blocks({{2, text("cd")}, {0, text("ab")}}) == text("abcd"));
    try {
      merge_blocks({{0, text("ab")}, {3, text("d")}});
      FAIL("expected a tiling error");
    } catch (const TilingError& e) {
      CHECK(e.boundary() == 2);
    }
    try {
      merge_blocks({{0, text("abc")}, {2, text("d")}});
      FAIL("expected a tiling error");
    } catch (const TilingError& e) {
      CHECK(e.boundary() == 2);
    }
    CHECK_THROWS_AS(merge_blocks({}), TilingError);
  }

  TEST_CASE("split and merge round-trip random tilings") {
    std::mt19937_64 rng(21);
    bool ok = true;
    for (int t = 0; t < 500; ++t) {
      Bytes payload(1 + rng() % 5000);
      for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
      std::vector<std::pair<std::uint64_t, Bytes>> parts;
      std::uint64_t off = 0;
      while (off < payload.size()) {
        const std::uint64_t len = std::min<std::uint64_t>(1 + rng() % 700, payload.size() - off);
        parts.emplace_back(off, split_block(payload, off, len));
        off += len;
      }
      std::shuffle(parts.begin(), parts.end(), rng);
      ok = ok && merge_blocks(parts) == payload;
    }
    CHECK(ok);
  }

  TEST_CASE("latency estimates") {
    const CostModel defaults;
    CHECK(estimate_latency(defaults, ScenarioKind::Disassemble, 4096) == 1000);
    CHECK(estimate_latency(defaults, ScenarioKind::Reformat, 123456789) == 40000);
    CHECK(estimate_latency(defaults, ScenarioKind::Revise, 1) < 150000);
    CostModel m;
    m.per_byte_us[index_of(ScenarioKind::Disassemble)] = 1.0 / 1024.0;
    CHECK(estimate_latency(m, ScenarioKind::Disassemble, 1 << 20) == 1000 + 1024);
    std::uint64_t prev = 0;
    for (std::uint64_t size = 1; size < (1u << 22); size *= 3) {
      const std::uint64_t v = estimate_latency(m, ScenarioKind::Disassemble, size);
      CHECK(v >= prev);
      prev = v;
    }
    m.per_byte_us[0] = -1.0;
    CHECK_THROWS_AS(m.validate(), ParameterError);
  }

  TEST_CASE("S2 generation concatenates donor payloads") {
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(block(0, "a/p1", 0, 4096)));
    c.admit(entry_of(block(0, "a/p2", 4096, 4096)));
    const RequestRecord q = block(1, "a/all", 0, 8192);
    const Classification j = judge(q, c);
    REQUIRE(j.kind == Classification::Kind::PseudoMiss);

    MapPayloadStore store;
    Bytes p1(4096), p2(4096);
    for (std::size_t i = 0; i < 4096; ++i) {
      p1[i] = static_cast<std::uint8_t>(i * 7);
      p2[i] = static_cast<std::uint8_t>(i * 13 + 1);
    }
    store.put(c.entries_with_key("a/p1")[0]->id(), p1);
    store.put(c.entries_with_key("a/p2")[0]->id(), p2);
    const GenerationOutcome out = generate(q, j, CostModel{}, &store);
    REQUIRE(out.payload.has_value());
    Bytes expect = p1;
    expect.insert(expect.end(), p2.begin(), p2.end());
    CHECK(*out.payload == expect);
    CHECK(out.latency_us == 1000);
    CHECK(out.produced_size == 8192);
    CHECK(c.peek("a/all", q.params) == nullptr);
  }

  TEST_CASE("synthetic payloads agree across chunks of the same content") {
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(block(0, "a/blk", 0, 10000)));
    const SyntheticPayloadStore store(42);
    const RequestRecord q = block(1, "a/blk", 1234, 5000);
    const GenerationOutcome out = generate(q, judge(q, c), CostModel{}, &store);
    REQUIRE(out.payload.has_value());
    CHECK(*out.payload == store.bytes_for("a/blk", ByteRange{1234, 5000}));
    CHECK(store.bytes_for("a/x", ByteRange{100, 50}) == store.bytes_for("a/y", ByteRange{100, 50}));
    CHECK(store.bytes_for("a/x", ByteRange{100, 50}) != store.bytes_for("b/x", ByteRange{100, 50}));
  }

  TEST_CASE("image generation is cost-modelled only") {
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(image(0, "p", 1920, 1080, "jpg", 100000)));
    const RequestRecord q = image(1, "p", 960, 540, "jpg", 25000);
    const GenerationOutcome out = generate(q, judge(q, c), CostModel{}, nullptr);
    CHECK(out.scenario == ScenarioKind::Reshape);
    CHECK_FALSE(out.payload.has_value());
    CHECK(out.latency_us == 40000);
    CHECK(out.cpu_core_us == doctest::Approx(40000.0));
    CHECK(c.size() == 1);
    CHECK(c.peek("p/img", q.params) == nullptr);
  }

  TEST_CASE("missing donor payloads are storage errors") {
    CacheState c(1 << 30, PolicyKind::Lru);
    c.admit(entry_of(block(0, "a/blk", 0, 8192)));
    const RequestRecord q = block(1, "a/blk", 0, 4096);
    const MapPayloadStore empty;
    CHECK_THROWS_AS(generate(q, judge(q, c), CostModel{}, &empty), StorageError);
    Classification miss;
    CHECK_THROWS_AS(generate(q, miss, CostModel{}, nullptr), Error);
  }
}
