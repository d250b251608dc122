// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cogent/trace.hpp"

namespace cogent {

inline constexpr std::uint64_t kNeverSeen = std::numeric_limits<std::uint64_t>::max();

struct ReuseFeatures {
  std::string file_type;           // "<modality>:<format>"
  std::uint64_t file_size = 0;     // bytes
  std::uint64_t age = 0;           // us since the content group was first seen
  std::uint64_t recency = kNeverSeen;  // us since last request of the object, else of its group
  std::uint64_t frequency = 0;     // prior group requests inside the sliding window

  friend bool operator==(const ReuseFeatures&, const ReuseFeatures&) = default;
};

enum FeatureIndex : int { kFileType = 0, kFileSize = 1, kAge = 2, kRecency = 3, kFrequency = 4 };
inline constexpr int kFeatureCount = 5;

/// Per-run request history feeding the reuse predictor.
class AccessHistory {
 public:
  explicit AccessHistory(std::uint64_t frequency_window = 10000) : window_(frequency_window) {}

  /// Features of `req` given everything recorded so far.
  ReuseFeatures features(const RequestRecord& req, std::uint64_t now) const;
  void record(const RequestRecord& req);

 private:
  std::uint64_t window_;
  std::unordered_map<std::string, std::uint64_t> content_first_;
  std::unordered_map<std::string, std::uint64_t> content_last_;
  std::unordered_map<std::string, std::uint64_t> object_last_;
  std::unordered_map<std::string, std::uint64_t> window_counts_;
  std::deque<std::string> recent_;
};

std::string file_type_of(const RequestRecord& req);

struct TrainingSample {
  ReuseFeatures features;
  bool label = false;
};

struct TrainingConfig {
  double prefix_fraction = 0.2;
  std::uint64_t horizon_us = 100000;
  std::uint64_t horizon_requests = 1000;
  std::uint64_t frequency_window = 10000;
};

/// Samples for every request in the training prefix whose reuse horizon closes
/// inside the prefix. label = the same (key, params) is requested again within
/// the horizon (both the time and the request-count limit).
std::vector<TrainingSample> build_training_samples(std::span<const RequestRecord> trace, const TrainingConfig& cfg);

struct TreeConfig {
  int max_depth = 6;
  std::size_t min_leaf = 20;
};

struct TreeNode {
  bool leaf = true;
  int feature = 0;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  bool predict = true;
  double positive_fraction = 0.0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary reuse classifier over ReuseFeatures. file_type is encoded as a
/// category code fixed at training time; unseen categories encode as -1.
class DecisionTree {
 public:
  /// A single leaf predicting reuse.
  DecisionTree() : nodes_(1, TreeNode{.positive_fraction = 1.0}) {}

  static DecisionTree constant(bool predict);

  bool predict(std::span<const double> x) const;
  bool predict(const ReuseFeatures& f) const { return predict(encode(f)); }
  std::array<double, kFeatureCount> encode(const ReuseFeatures& f) const;

  int depth() const;
  std::size_t leaf_count() const;
  int feature_count() const { return feature_count_; }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const std::vector<std::string>& categories() const { return categories_; }

  /// Line-oriented text: a `tree features <n>` header, `category <code> <name>`
  /// lines, then `node <id> feat <i> thr <v> left <id> right <id>` and
  /// `leaf <id> pred <0|1> frac <f>` lines. Node 0 is the root.
  std::string serialize() const;
  static DecisionTree parse(std::istream& in);
  static DecisionTree parse(std::string_view text);

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  friend DecisionTree train(std::span<const TrainingSample> samples, const TreeConfig& cfg);
  void check() const;

  int feature_count_ = kFeatureCount;
  std::vector<std::string> categories_;
  std::vector<TreeNode> nodes_;
};

/// Greedy CART growth on Gini impurity. Leaves predict the majority label with
/// ties going to true. Throws TrainingError on an empty sample list.
DecisionTree train(std::span<const TrainingSample> samples, const TreeConfig& cfg = {});

double training_accuracy(const DecisionTree& tree, std::span<const TrainingSample> samples);

struct FetchDecision {
  bool fetch = false;
};

/// Throws SchemaError if the tree was trained over a different feature schema.
FetchDecision decide(const DecisionTree& tree, const ReuseFeatures& features);

struct FetchOrder {
  std::string object;
  std::uint64_t issued_at = 0;
  std::uint64_t complete_at = 0;
};

struct PseudoMissActions {
  bool generate = true;
  FetchDecision decision;
  std::optional<FetchOrder> fetch;
};

/// Two-pronged controller: every pseudo-miss is answered by generation; an
/// origin fetch is added when the predictor expects reuse and none is in flight
/// for the same object. Without a tree the fetch prong is off.
class TwoProngedController {
 public:
  explicit TwoProngedController(std::optional<DecisionTree> tree = std::nullopt) : tree_(std::move(tree)) {}

  bool enabled() const { return tree_.has_value(); }
  PseudoMissActions on_pseudo_miss(const RequestRecord& req, const ReuseFeatures& features, std::uint64_t now,
                                   std::uint64_t fetch_latency_us);
  void on_fetch_complete(const std::string& object);

  bool in_flight(const std::string& object) const { return in_flight_.count(object) > 0; }
  std::size_t in_flight_count() const { return in_flight_.size(); }

 private:
  std::optional<DecisionTree> tree_;
  std::unordered_set<std::string> in_flight_;
};

}  // namespace cogent
