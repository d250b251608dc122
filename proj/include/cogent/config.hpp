// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cogent/controller.hpp"
#include "cogent/engine.hpp"
#include "cogent/genhit.hpp"

namespace cogent {

/// Everything one simulation run needs, as a flat set of named keys. Every key
/// has a default, so a default-constructed config is valid.
struct RunConfig {
  std::string trace;
  std::string output_dir = ".";
  std::optional<std::uint64_t> capacity_bytes;  // else capacity_fraction of the footprint
  double capacity_fraction = 0.1;
  bool two_pronged = true;
  std::string tree;              // trained tree file; auto-trained when empty
  std::string origin_histogram;  // empirical origin latency file; constant when empty
  bool payload_mode = false;
  TrainingConfig training;
  TreeConfig tree_config;
  RunSettings settings;  // tree, payloads and capacity are filled in by prepare_run

  /// Sets one key from its text value. Throws ConfigError for an unknown key
  /// or an unparsable value.
  void set(std::string_view key, std::string_view value);
  /// Current value of a key in the same text form set() accepts.
  std::string get(std::string_view key) const;

  /// Every key in a fixed order.
  static const std::vector<std::string>& keys();

  /// `key = value` lines for every key, reloadable by parse().
  std::string echo() const;

  /// Applies `key = value` lines on top of the current values; '#' starts a
  /// comment. Throws ConfigError naming the line.
  void parse(std::istream& in);
  void load(const std::filesystem::path& path);
};

/// A config resolved against its trace: capacity fixed, histogram and tree
/// loaded (or trained), payload store created.
struct PreparedRun {
  RunSettings settings;
  std::unique_ptr<SyntheticPayloadStore> payloads;
  bool tree_trained = false;
};

PreparedRun prepare_run(const RunConfig& config, std::span<const RequestRecord> trace);

/// Trains the reuse tree from the trace prefix. Throws TrainingError when the
/// prefix yields no samples.
DecisionTree train_from_trace(std::span<const RequestRecord> trace, const TrainingConfig& training,
                              const TreeConfig& tree);

}  // namespace cogent
