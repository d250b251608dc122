// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include "cogent/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "cogent/error.hpp"

namespace cogent {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  const std::string t(v);
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    if (t.empty() || t[0] == '-') throw std::invalid_argument("sign");
    x = std::stoull(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size()) throw ConfigError(std::string(key) + ": expected a non-negative integer, got '" + t + "'");
  return x;
}

double to_double(std::string_view key, std::string_view v) {
  const std::string t(v);
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size() || !std::isfinite(x)) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + t + "'");
  }
  return x;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(std::string(key) + ": expected on or off, got '" + std::string(v) + "'");
}

std::string from_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string from_bool(bool v) { return v ? "on" : "off"; }

struct Field {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view, std::string_view)> set;
};

template <typename Member>
Field uint_field(Member member) {
  return {[member](const RunConfig& c) { return std::to_string(member(const_cast<RunConfig&>(c))); },
          [member](RunConfig& c, std::string_view k, std::string_view v) { member(c) = to_uint(k, v); }};
}

template <typename Member>
Field double_field(Member member) {
  return {[member](const RunConfig& c) { return from_double(member(const_cast<RunConfig&>(c))); },
          [member](RunConfig& c, std::string_view k, std::string_view v) { member(c) = to_double(k, v); }};
}

template <typename Member>
Field bool_field(Member member) {
  return {[member](const RunConfig& c) { return from_bool(member(const_cast<RunConfig&>(c))); },
          [member](RunConfig& c, std::string_view k, std::string_view v) { member(c) = to_bool(k, v); }};
}

template <typename Member>
Field string_field(Member member) {
  return {[member](const RunConfig& c) { return member(const_cast<RunConfig&>(c)); },
          [member](RunConfig& c, std::string_view, std::string_view v) { member(c) = std::string(v); }};
}

using FieldTable = std::vector<std::pair<std::string, Field>>;

FieldTable build_table() {
  FieldTable t;
  auto add = [&](std::string name, Field f) { t.emplace_back(std::move(name), std::move(f)); };

  add("trace", string_field([](RunConfig& c) -> std::string& { return c.trace; }));
  add("output_dir", string_field([](RunConfig& c) -> std::string& { return c.output_dir; }));
  add("arch", {[](const RunConfig& c) { return std::string(to_string(c.settings.architecture)); },
               [](RunConfig& c, std::string_view k, std::string_view v) {
                 try {
                   c.settings.architecture = parse_architecture(v);
                 } catch (const ParameterError& e) {
                   throw ConfigError(std::string(k) + ": " + e.what());
                 }
               }});
  add("policy", {[](const RunConfig& c) { return std::string(to_string(c.settings.policy)); },
                 [](RunConfig& c, std::string_view k, std::string_view v) {
                   try {
                     c.settings.policy = parse_policy(v);
                   } catch (const ParameterError& e) {
                     throw ConfigError(std::string(k) + ": " + e.what());
                   }
                 }});
  add("capacity_bytes", {[](const RunConfig& c) { return c.capacity_bytes ? std::to_string(*c.capacity_bytes) : std::string("auto"); },
                         [](RunConfig& c, std::string_view k, std::string_view v) {
                           if (v == "auto" || v.empty()) {
                             c.capacity_bytes.reset();
                           } else {
                             c.capacity_bytes = to_uint(k, v);
                           }
                         }});
  add("capacity_fraction", double_field([](RunConfig& c) -> double& { return c.capacity_fraction; }));
  add("seed", uint_field([](RunConfig& c) -> std::uint64_t& { return c.settings.seed; }));
  add("window_us", uint_field([](RunConfig& c) -> std::uint64_t& { return c.settings.window_us; }));
  add("warmup_requests", uint_field([](RunConfig& c) -> std::uint64_t& { return c.settings.warmup_requests; }));

  add("latency_mode", {[](const RunConfig& c) {
                         return std::string(c.settings.latency.mode == LatencyMode::Measured ? "measured" : "idealized");
                       },
                       [](RunConfig& c, std::string_view k, std::string_view v) {
                         if (v == "measured") {
                           c.settings.latency.mode = LatencyMode::Measured;
                         } else if (v == "idealized") {
                           c.settings.latency.mode = LatencyMode::IdealizedHitZero;
                         } else {
                           throw ConfigError(std::string(k) + ": expected measured or idealized");
                         }
                       }});
  add("hit_us", uint_field([](RunConfig& c) -> std::uint64_t& { return c.settings.latency.hit_us; }));
  add("origin_fetch_us", uint_field([](RunConfig& c) -> std::uint64_t& { return c.settings.latency.origin_fetch_us; }));
  add("origin_histogram", string_field([](RunConfig& c) -> std::string& { return c.origin_histogram; }));
  add("write_us", uint_field([](RunConfig& c) -> std::uint64_t& { return c.settings.latency.write_us; }));
  add("miss_send_us", uint_field([](RunConfig& c) -> std::uint64_t& { return c.settings.latency.miss_send_us; }));
  add("judgment_us", uint_field([](RunConfig& c) -> std::uint64_t& { return c.settings.latency.judgment_us; }));
  add("pseudo_send_us", uint_field([](RunConfig& c) -> std::uint64_t& { return c.settings.latency.pseudo_send_us; }));

  for (std::size_t i = 0; i < kScenarioCount; ++i) {
    const std::string s = "s" + std::to_string(i + 1);
    add("gen_" + s + "_base_us",
        uint_field([i](RunConfig& c) -> std::uint64_t& { return c.settings.cost.base_us[i]; }));
    add("gen_" + s + "_per_byte_us",
        double_field([i](RunConfig& c) -> double& { return c.settings.cost.per_byte_us[i]; }));
  }
  add("gen_cores", double_field([](RunConfig& c) -> double& { return c.settings.cost.cpu_cores_per_generation; }));
  add("cpu_cores", double_field([](RunConfig& c) -> double& { return c.settings.cpu_cores; }));
  add("cpu_cap", double_field([](RunConfig& c) -> double& { return c.settings.cpu_utilization_cap; }));
  add("payload_mode", bool_field([](RunConfig& c) -> bool& { return c.payload_mode; }));

  add("hamming_threshold", {[](const RunConfig& c) { return std::to_string(c.settings.shield.hamming_threshold); },
                            [](RunConfig& c, std::string_view k, std::string_view v) {
                              const std::uint64_t x = to_uint(k, v);
                              if (x > 128) throw ConfigError(std::string(k) + ": must be at most 128");
                              c.settings.shield.hamming_threshold = static_cast<int>(x);
                            }});
  for (std::size_t i = 0; i < kScenarioCount; ++i) {
    add("enable_s" + std::to_string(i + 1),
        {[i](const RunConfig& c) { return from_bool(c.settings.shield.scenario_enabled[i]); },
         [i](RunConfig& c, std::string_view k, std::string_view v) { c.settings.shield.scenario_enabled[i] = to_bool(k, v); }});
  }
  add("cpu_check", bool_field([](RunConfig& c) -> bool& { return c.settings.shield.cpu_check; }));
  add("time_check", bool_field([](RunConfig& c) -> bool& { return c.settings.shield.time_check; }));

  add("two_pronged", bool_field([](RunConfig& c) -> bool& { return c.two_pronged; }));
  add("tree", string_field([](RunConfig& c) -> std::string& { return c.tree; }));
  add("train_prefix", double_field([](RunConfig& c) -> double& { return c.training.prefix_fraction; }));
  add("horizon_us", uint_field([](RunConfig& c) -> std::uint64_t& { return c.training.horizon_us; }));
  add("horizon_requests", uint_field([](RunConfig& c) -> std::uint64_t& { return c.training.horizon_requests; }));
  add("frequency_window", uint_field([](RunConfig& c) -> std::uint64_t& { return c.training.frequency_window; }));
  add("max_depth", {[](const RunConfig& c) { return std::to_string(c.tree_config.max_depth); },
                    [](RunConfig& c, std::string_view k, std::string_view v) {
                      c.tree_config.max_depth = static_cast<int>(std::min<std::uint64_t>(to_uint(k, v), 64));
                    }});
  add("min_leaf", uint_field([](RunConfig& c) -> std::size_t& { return c.tree_config.min_leaf; }));
  return t;
}

const FieldTable& table() {
  static const FieldTable t = build_table();
  return t;
}

const Field& field(std::string_view key) {
  for (const auto& [name, f] : table()) {
    if (name == key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) { field(key).set(*this, key, trim(value)); }

std::string RunConfig::get(std::string_view key) const { return field(key).get(*this); }

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : table()) out.push_back(name);
    return out;
  }();
  return k;
}

std::string RunConfig::echo() const {
  std::string out;
  for (const auto& [name, f] : table()) out += name + " = " + f.get(*this) + "\n";
  return out;
}

void RunConfig::parse(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    try {
      set(key, std::string_view(text).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  parse(in);
}

DecisionTree train_from_trace(std::span<const RequestRecord> trace, const TrainingConfig& training,
                              const TreeConfig& tree) {
  const auto samples = build_training_samples(trace, training);
  if (samples.empty()) throw TrainingError("the training prefix yields no labelled samples");
  return train(samples, tree);
}

PreparedRun prepare_run(const RunConfig& config, std::span<const RequestRecord> trace) {
  PreparedRun out;
  out.settings = config.settings;
  RunSettings& s = out.settings;
  s.frequency_window = config.training.frequency_window;

  if (config.capacity_bytes) {
    s.capacity_bytes = *config.capacity_bytes;
  } else {
    if (!(config.capacity_fraction > 0.0)) throw ConfigError("capacity_fraction must be positive");
    const double cap = std::floor(config.capacity_fraction * static_cast<double>(footprint_bytes(trace)));
    s.capacity_bytes = std::max<std::uint64_t>(static_cast<std::uint64_t>(cap), 1);
  }

  if (!config.origin_histogram.empty()) s.latency.origin_histogram = LatencyHistogram::load(config.origin_histogram);

  s.tree.reset();
  if (s.architecture == Architecture::CoGenT && config.two_pronged) {
    if (!config.tree.empty()) {
      std::ifstream in(config.tree);
      if (!in) throw ConfigError("cannot open tree file '" + config.tree + "'");
      s.tree = DecisionTree::parse(in);
    } else {
      s.tree = train_from_trace(trace, config.training, config.tree_config);
      out.tree_trained = true;
    }
  }

  if (config.payload_mode) {
    out.payloads = std::make_unique<SyntheticPayloadStore>(s.seed);
    s.payloads = out.payloads.get();
  } else {
    s.payloads = nullptr;
  }
  s.validate();
  return out;
}

}  // namespace cogent
