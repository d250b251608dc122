// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cogent/config.hpp"
#include "cogent/engine.hpp"
#include "cogent/error.hpp"
#include "cogent/trace.hpp"

namespace fs = std::filesystem;
using namespace cogent;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw StorageError("cannot write '" + path.string() + "'");
  out << text;
  if (!out.flush()) throw StorageError("write failed for '" + path.string() + "'");
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

// Shared run/sweep options: a config file plus flag overrides.
struct RunFlags {
  std::string config_file;
  std::optional<std::string> trace, out_dir, arch, policy, capacity, two_pronged, tree, seed;
  std::vector<std::string> sets;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "Config file of 'key = value' lines");
    cmd->add_option("--trace", trace, "Trace CSV");
    cmd->add_option("-o,--out-dir", out_dir, "Output directory");
    cmd->add_option("--arch", arch, "original | cogent");
    cmd->add_option("--policy", policy, "lru | arc | lhd | lru-mad");
    cmd->add_option("--capacity", capacity, "Cache capacity in bytes, or 'auto'");
    cmd->add_option("--two-pronged", two_pronged, "on | off");
    cmd->add_option("--tree", tree, "Trained tree file");
    cmd->add_option("--seed", seed, "Run seed");
    cmd->add_option("--set", sets, "Any config key as key=value (repeatable)");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_file.empty()) cfg.load(config_file);
    auto apply = [&](const char* key, const std::optional<std::string>& v) {
      if (v) cfg.set(key, *v);
    };
    apply("trace", trace);
    apply("output_dir", out_dir);
    apply("arch", arch);
    apply("policy", policy);
    apply("capacity_bytes", capacity);
    apply("two_pronged", two_pronged);
    apply("tree", tree);
    apply("seed", seed);
    for (const std::string& s : sets) {
      const auto [k, v] = split_assignment(s);
      cfg.set(k, v);
    }
    return cfg;
  }
};

std::vector<RequestRecord> load_trace(const RunConfig& cfg) {
  if (cfg.trace.empty()) throw ConfigError("no trace given (use --trace or 'trace = ...')");
  return parse_trace(fs::path(cfg.trace));
}

int cmd_generate(const SyntheticSpec& spec, const std::string& out) {
  const auto records = generate_synthetic_trace(spec);
  if (out == "-") {
    write_trace(std::cout, records);
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    write_trace(fs::path(out), records);
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const auto records = parse_trace(fs::path(path));
  const TraceStats st = compute_stats(records);
  std::cout << "records " << st.records << "\nunique_keys " << st.unique_keys << "\nunique_content_ids "
            << st.unique_content_ids << "\nbytes " << st.bytes << "\nduration_us " << st.duration_us
            << "\nfootprint_bytes " << footprint_bytes(records) << "\nfootprint_redundancy "
            << footprint_redundancy(records) << "\n";
  return 0;
}

int cmd_train(const RunFlags& flags, const std::string& out) {
  const RunConfig cfg = flags.resolve();
  const auto records = load_trace(cfg);
  const auto samples = build_training_samples(records, cfg.training);
  if (samples.empty()) throw TrainingError("the training prefix yields no labelled samples");
  const DecisionTree tree = train(samples, cfg.tree_config);
  write_file(out, tree.serialize());
  const std::size_t positives =
      static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(), [](const auto& s) { return s.label; }));
  std::cout << "samples " << samples.size() << "\npositives " << positives << "\ndepth " << tree.depth()
            << "\nleaves " << tree.leaf_count() << "\ntraining_accuracy " << training_accuracy(tree, samples) << "\n";
  return 0;
}

int cmd_run(const RunFlags& flags) {
  const RunConfig cfg = flags.resolve();
  const auto records = load_trace(cfg);
  const PreparedRun prepared = prepare_run(cfg, records);
  const SimReport report = run(records, prepared.settings);

  const fs::path dir(cfg.output_dir);
  RunConfig resolved = cfg;
  resolved.capacity_bytes = prepared.settings.capacity_bytes;
  if (prepared.tree_trained) {
    write_file(dir / "tree.txt", prepared.settings.tree->serialize());
    resolved.tree = (dir / "tree.txt").string();
  }
  write_file(dir / "config.txt", resolved.echo());
  write_file(dir / "report.json", report_json(report));
  write_file(dir / "series.csv", series_csv(report));
  std::cout << summary_line(report) << "\n";
  return 0;
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t thread_cap() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COGENT_SIM_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) throw ConfigError("COGENT_SIM_THREADS must be a positive integer");
    n = v;
  }
  return n;
}

int cmd_sweep(const RunFlags& flags, const std::vector<std::string>& axes_text, const std::string& out) {
  if (axes_text.empty()) throw ConfigError("sweep needs at least one --axis key=v1,v2,...");
  const RunConfig base = flags.resolve();
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const std::string& a : axes_text) {
    const auto [key, values] = split_assignment(a);
    auto vals = split_values(values);
    vals.erase(std::remove_if(vals.begin(), vals.end(), [](const std::string& v) { return v.empty(); }), vals.end());
    if (vals.empty()) throw ConfigError("axis '" + key + "' has no values");
    RunConfig probe = base;
    for (const auto& v : vals) probe.set(key, v);
    axes.emplace_back(key, std::move(vals));
  }

  // Matrix order: the last axis varies fastest.
  std::vector<RunConfig> configs{base};
  for (const auto& [key, vals] : axes) {
    std::vector<RunConfig> next;
    for (const RunConfig& c : configs) {
      for (const auto& v : vals) {
        RunConfig n = c;
        n.set(key, v);
        next.push_back(std::move(n));
      }
    }
    configs = std::move(next);
  }

  std::map<std::string, std::vector<RequestRecord>> traces;
  for (const RunConfig& c : configs) {
    if (!traces.count(c.trace)) traces.emplace(c.trace, load_trace(c));
  }

  std::vector<std::string> rows(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        const auto& records = traces.at(configs[i].trace);
        const PreparedRun prepared = prepare_run(configs[i], records);
        const SimReport r = run(records, prepared.settings);
        std::string row;
        for (const auto& [key, vals] : axes) row += configs[i].get(key) + ",";
        const Counters& c = r.counters;
        row += std::to_string(prepared.settings.capacity_bytes) + "," + std::to_string(c.requests) + "," +
               std::to_string(c.hits) + "," + std::to_string(c.misses) + "," + std::to_string(c.pseudo_misses) + "," +
               std::to_string(c.shielded) + "," + std::to_string(c.two_pronged_fetches) + ",";
        std::string summary = summary_line(r);
        std::replace(summary.begin(), summary.end(), ' ', ',');
        rows[i] = row + summary + "\n";
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(thread_cap(), configs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::string csv;
  for (const auto& [key, vals] : axes) csv += key + ",";
  csv += "capacity,requests,hits,misses,pseudo_misses,shielded,two_pronged_fetches,mean_ms,p99_ms,p999_ms,origin_gbps,"
         "redundancy\n";
  for (const std::string& r : rows) csv += r;
  const fs::path path = out.empty() ? fs::path(base.output_dir) / "sweep.csv" : fs::path(out);
  write_file(path, csv);
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven simulator for generative cache hits at CDN edges"};
  app.require_subcommand(1);

  SyntheticSpec spec;
  std::string gen_out = "-";
  auto* gen = app.add_subcommand("generate", "Write a synthetic trace");
  gen->add_option("-o,--out", gen_out, "Output CSV ('-' for stdout)");
  gen->add_option("--objects", spec.objects, "Total variants N");
  gen->add_option("--groups", spec.groups, "Content groups G");
  gen->add_option("--alpha", spec.zipf_alpha, "Zipf exponent over groups");
  gen->add_option("--mean-interarrival-us", spec.mean_interarrival_us, "Mean inter-arrival time");
  gen->add_option("--requests", spec.requests, "Request count R");
  gen->add_option("--seed", spec.seed, "RNG seed");
  gen->add_option("--image-fraction", spec.image_fraction, "Share of image groups");
  gen->add_option("--block-size", spec.block_size, "Bytes per block content");
  gen->add_option("--image-size-min", spec.image_size_min, "Smallest image variant");
  gen->add_option("--image-size-max", spec.image_size_max, "Largest image variant");
  gen->add_option("--intra-distance", spec.intra_group_distance, "Max simhash distance within a group");
  gen->add_option("--threshold", spec.match_threshold, "Cross-group simhash distance floor (exclusive)");

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "Parse and check a trace, print its statistics");
  val->add_option("trace", validate_path, "Trace CSV")->required();

  RunFlags train_flags;
  std::string tree_out = "tree.txt";
  auto* trn = app.add_subcommand("train", "Train the reuse predictor on the trace prefix");
  train_flags.attach(trn);
  trn->add_option("--out", tree_out, "Tree output file");

  RunFlags run_flags;
  auto* rn = app.add_subcommand("run", "Simulate one configuration");
  run_flags.attach(rn);

  RunFlags sweep_flags;
  std::vector<std::string> axes;
  std::string sweep_out;
  auto* sw = app.add_subcommand("sweep", "Simulate the cross product of parameter axes");
  sweep_flags.attach(sw);
  sw->add_option("--axis", axes, "key=v1,v2,... (repeatable)");
  sw->add_option("--csv", sweep_out, "Combined CSV path (default <out-dir>/sweep.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(spec, gen_out);
    if (*val) return cmd_validate(validate_path);
    if (*trn) return cmd_train(train_flags, tree_out);
    if (*rn) return cmd_run(run_flags);
    if (*sw) return cmd_sweep(sweep_flags, axes, sweep_out);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
