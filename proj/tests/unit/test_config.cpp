// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include <set>
#include <sstream>

#include "cogent/config.hpp"
#include "cogent/error.hpp"
#include "doctest.h"

using namespace cogent;

TEST_SUITE("config") {
  TEST_CASE("defaults are valid and every key round-trips") {
    RunConfig c;
    CHECK_NOTHROW(c.settings.validate());
    const auto& keys = RunConfig::keys();
    CHECK(std::set<std::string>(keys.begin(), keys.end()).size() == keys.size());
    for (const std::string& k : keys) CHECK_NOTHROW(c.set(k, c.get(k)));
    CHECK(c.get("arch") == "cogent");
    CHECK(c.get("capacity_bytes") == "auto");
    CHECK(c.get("capacity_fraction") == "0.1");
    CHECK(c.get("cpu_cap") == "0.6");
  }

  TEST_CASE("echo output reloads to the same configuration") {
    RunConfig a;
    a.set("arch", "CoGenT");
    a.set("policy", "ARC");
    a.set("capacity_bytes", "123456");
    a.set("origin_fetch_us", "99000");
    a.set("enable_s3", "off");
    a.set("hamming_threshold", "5");
    a.set("gen_s1_per_byte_us", "0.001");
    RunConfig b;
    std::istringstream in(a.echo());
    b.parse(in);
    CHECK(b.echo() == a.echo());
    CHECK(b.get("enable_s3") == a.get("enable_s3"));
    CHECK(b.settings.capacity_bytes == a.settings.capacity_bytes);
    CHECK(b.capacity_bytes == std::optional<std::uint64_t>(123456));
  }

  TEST_CASE("comments and blank lines are ignored") {
    RunConfig c;
    std::istringstream in("# header\n\n  policy = LHD   # trailing\nseed=7\n");
    c.parse(in);
    CHECK(c.get("policy") == "lhd");
    CHECK(c.get("seed") == "7");
  }

  TEST_CASE("bad keys, values and lines are config errors") {
    RunConfig c;
    CHECK_THROWS_AS(c.set("no_such_key", "1"), ConfigError);
    CHECK_THROWS_AS(c.set("seed", "abc"), ConfigError);
    CHECK_THROWS_AS(c.set("two_pronged", "maybe"), ConfigError);
    CHECK_THROWS_AS(c.get("no_such_key"), ConfigError);
    std::istringstream in("seed = 1\njust text\n");
    try {
      c.parse(in);
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(c.load("/nonexistent/config.txt"), ConfigError);
  }

  TEST_CASE("prepare_run resolves capacity and the tree") {
    SyntheticSpec spec;
    spec.requests = 3000;
    spec.objects = 200;
    spec.groups = 40;
    const auto t = generate_synthetic_trace(spec);
    RunConfig c;
    c.set("arch", "original");
    c.capacity_fraction = 0.25;
    PreparedRun p = prepare_run(c, t);
    CHECK(p.settings.capacity_bytes == footprint_bytes(t) / 4);
    CHECK_FALSE(p.settings.tree.has_value());
    CHECK_FALSE(p.tree_trained);

    c.set("arch", "CoGenT");
    c.set("payload_mode", "on");
    p = prepare_run(c, t);
    CHECK(p.tree_trained);
    CHECK(p.settings.tree.has_value());
    CHECK(p.settings.payloads == p.payloads.get());

    c.set("two_pronged", "off");
    p = prepare_run(c, t);
    CHECK_FALSE(p.settings.tree.has_value());

    c.set("two_pronged", "on");
    c.set("tree", "/nonexistent/tree.txt");
    CHECK_THROWS_AS(prepare_run(c, t), ConfigError);
  }
}
