// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "cogent/engine.hpp"
#include "cogent/error.hpp"
#include "cogent/simhash.hpp"
#include "cogent/trace.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace cogent;

namespace {

std::vector<RequestRecord> parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_trace(in);
}

std::string header() { return std::string(kTraceHeader) + "\n"; }

// Empirical CDF over ranks 0..n-1 from counts.
std::vector<double> cdf_of(const std::vector<double>& counts) {
  std::vector<double> cdf(counts.size());
  double total = 0.0;
  for (const double c : counts) total += c;
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    acc += counts[i];
    cdf[i] = acc / total;
  }
  return cdf;
}

double ks(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_SUITE("trace") {
  TEST_CASE("single row maps fields directly") {
    const auto recs = parse_text(header() + "0,a/v1,off=0,len=4096,4096,c1,Block,raw,,\n");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].key == "a/v1");
    CHECK(recs[0].size == 4096);
    CHECK(recs[0].content_id == "c1");
    CHECK(recs[0].modality == Modality::Block);
    CHECK(recs[0].params.get_uint("len") == 4096u);
    CHECK_FALSE(recs[0].simhash.has_value());
    CHECK_FALSE(recs[0].origin_latency_override_us.has_value());
  }

  TEST_CASE("canonical params with semicolons") {
    const auto recs = parse_text(header() + "5,a/v1,len=10;off=2,10,a,Block,raw,,77\n");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].params.canonical() == "len=10;off=2");
    CHECK(recs[0].origin_latency_override_us == 77u);
    CHECK(requested_range(recs[0]) == ByteRange{2, 10});
  }

  TEST_CASE("header only and empty file give an empty trace") {
    CHECK(parse_text(header()).empty());
    CHECK(parse_text("").empty());
    CHECK(compute_stats({}) == TraceStats{});
  }

  TEST_CASE("malformed rows name line and field") {
    try {
      parse_text(header() + "0,a,,10,a,Other,x,,\n1,b,,zero,b,Other,x,,\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
      CHECK(e.field() == "size");
    }
    try {
      parse_text(header() + "0,a,,10,a,Other,x,abc,\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.field() == "simhash");
    }
    try {
      parse_text(header() + "0,a,,10,a,Video,x,,\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.field() == "modality");
    }
  }

  TEST_CASE("timestamp regression names the offending line") {
    try {
      parse_text(header() + "10,a,,10,a,Other,x,,\n20,a,,10,a,Other,x,,\n15,a,,10,a,Other,x,,\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
      CHECK(e.field() == "ts_us");
    }
  }

  TEST_CASE("param grammar") {
    CHECK(ParamSet::parse("w=3;fmt=png").canonical() == "fmt=png;w=3");
    CHECK(ParamSet::parse("") == ParamSet{});
    CHECK_THROWS_AS(ParamSet::parse("len=0"), ParameterError);
    CHECK_THROWS_AS(ParamSet::parse("off=-1"), ParameterError);
    CHECK_THROWS_AS(ParamSet::parse("w=1;w=2"), ParameterError);
    CHECK_THROWS_AS(ParamSet::parse("novalue"), ParameterError);
    CHECK(ParamSet::parse("x=y").get("x") == "y");
  }

  TEST_CASE("simhash hex round trip and distance") {
    const SimHash a = SimHash::from_hex("0123456789abcdef0123456789ABCDEF");
    CHECK(a.to_hex() == "0123456789abcdef0123456789abcdef");
    CHECK(hamming_distance(a, a) == 0);
    CHECK(hamming_distance(a, flip_bit(flip_bit(a, 3), 100)) == 2);
    CHECK_THROWS_AS(SimHash::from_hex("0123"), ParameterError);
    CHECK_THROWS_AS(SimHash::from_hex("g123456789abcdef0123456789abcdef"), ParameterError);
  }

  TEST_CASE("generated traces round-trip through the file format") {
    SyntheticSpec spec;
    spec.requests = 1000;
    spec.seed = 3;
    const auto recs = generate_synthetic_trace(spec);
    REQUIRE(recs.size() == 1000);
    std::stringstream buf;
    write_trace(buf, recs);
    const auto back = parse_trace(buf);
    CHECK(back == recs);
  }

  TEST_CASE("same seed gives byte-identical output") {
    SyntheticSpec spec;
    spec.requests = 2000;
    spec.seed = 7;
    std::stringstream a, b;
    write_trace(a, generate_synthetic_trace(spec));
    write_trace(b, generate_synthetic_trace(spec));
    CHECK(a.str() == b.str());
    spec.seed = 8;
    std::stringstream c;
    write_trace(c, generate_synthetic_trace(spec));
    CHECK(c.str() != a.str());
  }

  TEST_CASE("parameter errors") {
    SyntheticSpec spec;
    spec.groups = spec.objects + 1;
    CHECK_THROWS_AS(generate_synthetic_trace(spec), ParameterError);
    spec = SyntheticSpec{};
    spec.mean_interarrival_us = 0;
    CHECK_THROWS_AS(generate_synthetic_trace(spec), ParameterError);
    spec = SyntheticSpec{};
    spec.zipf_alpha = -1;
    CHECK_THROWS_AS(generate_synthetic_trace(spec), ParameterError);
  }

  TEST_CASE("generated records satisfy invariants") {
    SyntheticSpec spec;
    spec.requests = 5000;
    const auto recs = generate_synthetic_trace(spec);
    CHECK_NOTHROW(validate_records(recs));
    const TraceStats st = compute_stats(recs);
    CHECK(st.unique_content_ids <= st.unique_keys);
    CHECK(st.unique_keys <= st.records);
    for (const auto& r : recs) {
      CHECK(r.key.rfind(r.content_id + "/", 0) == 0);
      if (r.modality == Modality::Image) CHECK(r.simhash.has_value());
    }
  }

  TEST_CASE("simhash distances within and across groups") {
    SyntheticSpec spec;
    spec.objects = 600;
    spec.groups = 100;
    spec.requests = 30000;
    spec.zipf_alpha = 0.0;
    spec.image_fraction = 1.0;
    const auto recs = generate_synthetic_trace(spec);
    std::map<std::string, std::pair<std::string, SimHash>> codes;  // object id -> (content, code)
    for (const auto& r : recs) codes.emplace(object_id(r), std::make_pair(r.content_id, *r.simhash));
    std::vector<std::pair<std::string, SimHash>> list;
    for (const auto& [id, v] : codes) list.push_back(v);
    REQUIRE(list.size() > 300);
    int worst_intra = 0;
    int best_cross = 128;
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        const int d = hamming_distance(list[i].second, list[j].second);
        if (list[i].first == list[j].first) {
          worst_intra = std::max(worst_intra, d);
        } else {
          best_cross = std::min(best_cross, d);
        }
      }
    }
    CHECK(worst_intra <= spec.intra_group_distance);
    CHECK(best_cross > spec.match_threshold);
  }

  TEST_CASE("uniform popularity with singleton groups has no content locality") {
    SyntheticSpec spec;
    spec.objects = 200;
    spec.groups = 200;
    spec.zipf_alpha = 0.0;
    spec.requests = 5000;
    const auto recs = generate_synthetic_trace(spec);
    std::map<std::string, std::set<std::string>> per_group;
    for (const auto& r : recs) per_group[r.content_id].insert(object_id(r));
    for (const auto& [g, ids] : per_group) CHECK(ids.size() == 1);

    RunSettings s;
    s.capacity_bytes = footprint_bytes(recs) / 10;
    const SimReport rep = run(recs, s);
    CHECK(rep.counters.pseudo_misses == 0);
    CHECK(rep.counters.shielded == 0);
  }

  TEST_CASE("group popularity follows Zipf(1) against a direct sampling oracle") {
    SyntheticSpec spec;
    spec.objects = 400;
    spec.groups = 100;
    spec.zipf_alpha = 1.0;
    spec.requests = 100000;
    spec.seed = 11;
    const auto recs = generate_synthetic_trace(spec);
    std::vector<double> observed(spec.groups, 0.0);
    for (const auto& r : recs) observed[std::stoul(r.content_id.substr(1))] += 1.0;

    std::vector<double> weights(spec.groups);
    for (std::size_t g = 0; g < weights.size(); ++g) weights[g] = 1.0 / static_cast<double>(g + 1);
    const std::vector<double> model = cdf_of(weights);

    std::mt19937_64 gen(12345);
    std::discrete_distribution<std::size_t> oracle(weights.begin(), weights.end());
    std::vector<double> direct(spec.groups, 0.0);
    for (std::uint64_t i = 0; i < spec.requests; ++i) direct[oracle(gen)] += 1.0;

    const auto emp = cdf_of(observed);
    const auto ref = cdf_of(direct);
    CHECK(ks(emp, model) < 0.05);
    CHECK(ks(ref, model) < 0.05);
    CHECK(ks(emp, ref) < 0.05);
    // Every group has 4 variants.
    std::map<std::string, std::set<std::string>> variants;
    for (const auto& r : recs) variants[r.content_id].insert(object_id(r));
    CHECK(variants["c0"].size() == 4);
  }

  TEST_CASE("footprint statistics") {
    using testing::block;
    const std::vector<RequestRecord> recs = {block(0, "a/x", 0, 100), block(1, "a/x", 0, 50), block(2, "a/x", 0, 100),
                                             block(3, "b/x", 0, 30)};
    CHECK(footprint_bytes(recs) == 180);
    CHECK(footprint_redundancy(recs) == doctest::Approx(50.0 / 180.0));
  }
}
