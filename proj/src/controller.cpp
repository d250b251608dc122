// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include "cogent/controller.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>

#include "cogent/error.hpp"

namespace cogent {

// ---------------------------------------------------------------------------
// Features

std::string file_type_of(const RequestRecord& req) {
  std::string t(to_string(req.modality));
  t.push_back(':');
  t += req.format;
  return t;
}

ReuseFeatures AccessHistory::features(const RequestRecord& req, std::uint64_t now) const {
  ReuseFeatures f;
  f.file_type = file_type_of(req);
  f.file_size = req.size;
  if (const auto it = content_first_.find(req.content_id); it != content_first_.end()) {
    f.age = now > it->second ? now - it->second : 0;
  }
  if (const auto it = object_last_.find(object_id(req)); it != object_last_.end()) {
    f.recency = now > it->second ? now - it->second : 0;
  } else if (const auto g = content_last_.find(req.content_id); g != content_last_.end()) {
    f.recency = now > g->second ? now - g->second : 0;
  }
  if (const auto it = window_counts_.find(req.content_id); it != window_counts_.end()) f.frequency = it->second;
  return f;
}

void AccessHistory::record(const RequestRecord& req) {
  content_first_.try_emplace(req.content_id, req.timestamp_us);
  content_last_[req.content_id] = req.timestamp_us;
  object_last_[object_id(req)] = req.timestamp_us;
  if (window_ == 0) return;
  ++window_counts_[req.content_id];
  recent_.push_back(req.content_id);
  if (recent_.size() > window_) {
    const auto it = window_counts_.find(recent_.front());
    if (--it->second == 0) window_counts_.erase(it);
    recent_.pop_front();
  }
}

std::vector<TrainingSample> build_training_samples(std::span<const RequestRecord> trace, const TrainingConfig& cfg) {
  if (!(cfg.prefix_fraction > 0.0 && cfg.prefix_fraction <= 1.0)) {
    throw ParameterError("training prefix fraction must lie in (0, 1]");
  }
  const auto prefix = static_cast<std::size_t>(std::floor(cfg.prefix_fraction * static_cast<double>(trace.size())));
  std::vector<TrainingSample> samples;
  if (prefix == 0) return samples;

  std::vector<std::size_t> next(prefix, SIZE_MAX);
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = prefix; i-- > 0;) {
    std::string id = object_id(trace[i]);
    if (const auto it = seen.find(id); it != seen.end()) {
      next[i] = it->second;
      it->second = i;
    } else {
      seen.emplace(std::move(id), i);
    }
  }

  const std::uint64_t last_ts = trace[prefix - 1].timestamp_us;
  AccessHistory history(cfg.frequency_window);
  samples.reserve(prefix);
  for (std::size_t i = 0; i < prefix; ++i) {
    const RequestRecord& r = trace[i];
    const bool closes_by_count = i + cfg.horizon_requests <= prefix - 1;
    const bool closes_by_time = last_ts > r.timestamp_us + cfg.horizon_us;
    if (closes_by_count || closes_by_time) {
      TrainingSample s;
      s.features = history.features(r, r.timestamp_us);
      s.label = next[i] != SIZE_MAX && next[i] - i <= cfg.horizon_requests &&
                trace[next[i]].timestamp_us - r.timestamp_us <= cfg.horizon_us;
      samples.push_back(std::move(s));
    }
    history.record(r);
  }
  return samples;
}

// ---------------------------------------------------------------------------
// Tree

DecisionTree DecisionTree::constant(bool predict) {
  DecisionTree t;
  t.nodes_.clear();
  t.categories_.clear();
  TreeNode leaf;
  leaf.predict = predict;
  leaf.positive_fraction = predict ? 1.0 : 0.0;
  t.nodes_.push_back(leaf);
  return t;
}

std::array<double, kFeatureCount> DecisionTree::encode(const ReuseFeatures& f) const {
  const auto it = std::find(categories_.begin(), categories_.end(), f.file_type);
  const double code = it == categories_.end() ? -1.0 : static_cast<double>(it - categories_.begin());
  return {code, static_cast<double>(f.file_size), static_cast<double>(f.age), static_cast<double>(f.recency),
          static_cast<double>(f.frequency)};
}

bool DecisionTree::predict(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != feature_count_) {
    throw SchemaError("tree expects " + std::to_string(feature_count_) + " features, got " +
                      std::to_string(x.size()));
  }
  int id = 0;
  while (!nodes_[id].leaf) {
    const TreeNode& n = nodes_[id];
    id = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes_[id].predict;
}

int DecisionTree::depth() const {
  std::function<int(int)> walk = [&](int id) -> int {
    const TreeNode& n = nodes_[id];
    return n.leaf ? 0 : 1 + std::max(walk(n.left), walk(n.right));
  };
  return walk(0);
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.leaf; }));
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size()) throw ParseError(line, "value", "not a number: '" + token + "'");
  return v;
}

int parse_int(const std::string& token, std::size_t line, const char* field) {
  std::size_t used = 0;
  long v = -1;
  try {
    v = std::stol(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || v < 0 || v > 1 << 30) {
    throw ParseError(line, field, "not a non-negative integer: '" + token + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

std::string DecisionTree::serialize() const {
  std::ostringstream out;
  out << "tree features " << feature_count_ << '\n';
  for (std::size_t i = 0; i < categories_.size(); ++i) out << "category " << i << ' ' << categories_[i] << '\n';
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    if (n.leaf) {
      out << "leaf " << i << " pred " << (n.predict ? 1 : 0) << " frac " << format_double(n.positive_fraction) << '\n';
    } else {
      out << "node " << i << " feat " << n.feature << " thr " << format_double(n.threshold) << " left " << n.left
          << " right " << n.right << '\n';
    }
  }
  return out.str();
}

DecisionTree DecisionTree::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

DecisionTree DecisionTree::parse(std::istream& in) {
  DecisionTree t;
  t.nodes_.clear();
  t.categories_.clear();
  std::map<int, TreeNode> nodes;
  std::map<int, std::string> categories;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string kind;
    fields >> kind;
    if (kind == "tree") {
      std::string word, count;
      if (!(fields >> word >> count) || word != "features") throw ParseError(line_no, "tree", "expected 'tree features <n>'");
      t.feature_count_ = parse_int(count, line_no, "features");
      header = true;
    } else if (kind == "category") {
      std::string code;
      fields >> code;
      std::string name;
      std::getline(fields >> std::ws, name);
      const int c = parse_int(code, line_no, "category");
      if (!categories.emplace(c, name).second) throw ParseError(line_no, "category", "duplicate code");
    } else if (kind == "node" || kind == "leaf") {
      std::vector<std::string> tok;
      for (std::string s; fields >> s;) tok.push_back(s);
      TreeNode n;
      int id = -1;
      if (kind == "node") {
        if (tok.size() != 9 || tok[1] != "feat" || tok[3] != "thr" || tok[5] != "left" || tok[7] != "right") {
          throw ParseError(line_no, "node", "expected 'node <id> feat <i> thr <v> left <id> right <id>'");
        }
        id = parse_int(tok[0], line_no, "id");
        n.leaf = false;
        n.feature = parse_int(tok[2], line_no, "feat");
        n.threshold = parse_double(tok[4], line_no);
        n.left = parse_int(tok[6], line_no, "left");
        n.right = parse_int(tok[8], line_no, "right");
      } else {
        if (tok.size() != 5 || tok[1] != "pred" || tok[3] != "frac" || (tok[2] != "0" && tok[2] != "1")) {
          throw ParseError(line_no, "leaf", "expected 'leaf <id> pred <0|1> frac <f>'");
        }
        id = parse_int(tok[0], line_no, "id");
        n.leaf = true;
        n.predict = tok[2] == "1";
        n.positive_fraction = parse_double(tok[4], line_no);
      }
      if (!nodes.emplace(id, n).second) throw ParseError(line_no, "id", "duplicate node id " + std::to_string(id));
    } else {
      throw ParseError(line_no, "kind", "unknown line kind '" + kind + "'");
    }
  }
  if (!header) throw SchemaError("tree file lacks a 'tree features <n>' header");
  int expect = 0;
  for (auto& [code, name] : categories) {
    if (code != expect++) throw SchemaError("category codes must be contiguous from 0");
    t.categories_.push_back(std::move(name));
  }
  expect = 0;
  for (auto& [id, n] : nodes) {
    if (id != expect++) throw SchemaError("node ids must be contiguous from 0");
    t.nodes_.push_back(n);
  }
  t.check();
  return t;
}

void DecisionTree::check() const {
  if (nodes_.empty()) throw SchemaError("tree has no nodes");
  std::vector<int> seen(nodes_.size(), 0);
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (id < 0 || id >= static_cast<int>(nodes_.size())) throw SchemaError("child id out of range");
    if (seen[id]++) throw SchemaError("node " + std::to_string(id) + " reached twice");
    const TreeNode& n = nodes_[id];
    if (n.leaf) continue;
    if (n.feature < 0 || n.feature >= feature_count_) throw SchemaError("split on unknown feature");
    stack.push_back(n.right);
    stack.push_back(n.left);
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw SchemaError("unreachable node in tree");
}

// ---------------------------------------------------------------------------
// Training

namespace {

// Total Gini mass n * gini = 2 p q / n.
double gini_mass(double pos, double n) { return n > 0 ? 2.0 * pos * (n - pos) / n : 0.0; }

struct Builder {
  const std::vector<std::array<double, kFeatureCount>>& x;
  const std::vector<bool>& y;
  const TreeConfig& cfg;
  std::vector<TreeNode>& nodes;

  int grow(std::vector<std::size_t> idx, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    const double n = static_cast<double>(idx.size());
    const auto pos = static_cast<double>(std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return y[i]; }));
    nodes[id].leaf = true;
    nodes[id].predict = 2.0 * pos >= n;
    nodes[id].positive_fraction = pos / n;

    if (depth >= cfg.max_depth || pos == 0 || pos == n || idx.size() < 2 * std::max<std::size_t>(cfg.min_leaf, 1)) {
      return id;
    }

    const double parent = gini_mass(pos, n);
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    const std::size_t min_leaf = std::max<std::size_t>(cfg.min_leaf, 1);
    for (int f = 0; f < kFeatureCount; ++f) {
      std::vector<std::size_t> order = idx;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
      double left_pos = 0.0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        if (y[order[k]]) left_pos += 1.0;
        const double lo = x[order[k]][f];
        const double hi = x[order[k + 1]][f];
        if (lo == hi) continue;
        const std::size_t nl = k + 1;
        const std::size_t nr = order.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double gain = parent - gini_mass(left_pos, static_cast<double>(nl)) -
                            gini_mass(pos - left_pos, static_cast<double>(nr));
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = lo + (hi - lo) / 2.0;
        }
      }
    }
    if (best_feature < 0 || !(best_gain > 1e-9)) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) (x[i][best_feature] <= best_threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    TreeNode& node = nodes[id];
    node.leaf = false;
    node.predict = true;
    node.positive_fraction = 0.0;
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

}  // namespace

DecisionTree train(std::span<const TrainingSample> samples, const TreeConfig& cfg) {
  if (samples.empty()) throw TrainingError("cannot train on an empty sample list");
  if (cfg.max_depth < 0) throw ParameterError("max depth must be non-negative");

  // Categories ordered by positive fraction, so threshold splits on the code
  // realize the best subset split for a binary label.
  std::map<std::string, std::pair<double, double>> stats;  // name -> (pos, n)
  for (const TrainingSample& s : samples) {
    auto& st = stats[s.features.file_type];
    st.first += s.label ? 1.0 : 0.0;
    st.second += 1.0;
  }
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& [name, st] : stats) ranked.emplace_back(st.first / st.second, name);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  DecisionTree tree;
  tree.nodes_.clear();
  tree.categories_.clear();
  for (auto& [frac, name] : ranked) tree.categories_.push_back(name);

  std::vector<std::array<double, kFeatureCount>> x;
  std::vector<bool> y;
  x.reserve(samples.size());
  y.reserve(samples.size());
  for (const TrainingSample& s : samples) {
    x.push_back(tree.encode(s.features));
    y.push_back(s.label);
  }
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Builder{x, y, cfg, tree.nodes_}.grow(std::move(idx), 0);
  return tree;
}

double training_accuracy(const DecisionTree& tree, std::span<const TrainingSample> samples) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const TrainingSample& s : samples) correct += tree.predict(s.features) == s.label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

FetchDecision decide(const DecisionTree& tree, const ReuseFeatures& features) {
  if (tree.feature_count() != kFeatureCount) {
    throw SchemaError("tree was trained over " + std::to_string(tree.feature_count()) + " features, expected " +
                      std::to_string(kFeatureCount));
  }
  return FetchDecision{tree.predict(features)};
}

// ---------------------------------------------------------------------------
// Controller

PseudoMissActions TwoProngedController::on_pseudo_miss(const RequestRecord& req, const ReuseFeatures& features,
                                                       std::uint64_t now, std::uint64_t fetch_latency_us) {
  PseudoMissActions actions;
  actions.generate = true;
  if (!tree_) return actions;
  actions.decision = decide(*tree_, features);
  if (!actions.decision.fetch) return actions;
  std::string id = object_id(req);
  if (in_flight_.count(id) > 0) return actions;
  in_flight_.insert(id);
  actions.fetch = FetchOrder{std::move(id), now, now + fetch_latency_us};
  return actions;
}

void TwoProngedController::on_fetch_complete(const std::string& object) { in_flight_.erase(object); }

}  // namespace cogent
