// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include "cogent/trace.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "cogent/error.hpp"

namespace cogent {
namespace {

constexpr std::string_view kNumericKeys[] = {"off", "len", "w", "h", "q"};

bool is_numeric_key(std::string_view key) {
  return std::find(std::begin(kNumericKeys), std::end(kNumericKeys), key) != std::end(kNumericKeys);
}

std::optional<std::uint64_t> parse_u64(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

bool has_reserved_char(std::string_view s) {
  return s.find_first_of(",;=\n\r") != std::string_view::npos;
}

void validate_pair(std::string_view key, std::string_view value) {
  if (key.empty()) throw ParameterError("parameter with empty key");
  if (has_reserved_char(key) || has_reserved_char(value)) {
    throw ParameterError("parameter '" + std::string(key) + "' contains a reserved character");
  }
  if (is_numeric_key(key)) {
    const auto v = parse_u64(value);
    if (!v) {
      throw ParameterError("parameter '" + std::string(key) + "' must be a non-negative integer, got '" +
                           std::string(value) + "'");
    }
    if (key == "len" && *v == 0) throw ParameterError("parameter 'len' must be positive");
  }
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Block:
      return "Block";
    case Modality::Image:
      return "Image";
    case Modality::Other:
      return "Other";
  }
  return "Other";
}

Modality parse_modality(std::string_view text) {
  if (text == "Block") return Modality::Block;
  if (text == "Image") return Modality::Image;
  if (text == "Other") return Modality::Other;
  throw ParameterError("unknown modality '" + std::string(text) + "'");
}

ParamSet ParamSet::parse(std::string_view text) {
  ParamSet out;
  if (text.empty()) return out;
  for (std::string_view pair : split(text, ';')) {
    const std::size_t eq = pair.find('=');
    if (eq == std::string_view::npos) {
      throw ParameterError("parameter '" + std::string(pair) + "' is not key=value");
    }
    const std::string_view key = pair.substr(0, eq);
    if (out.contains(key)) throw ParameterError("duplicate parameter '" + std::string(key) + "'");
    out.set(key, pair.substr(eq + 1));
  }
  return out;
}

std::string ParamSet::canonical() const {
  std::string out;
  for (const auto& [k, v] : pairs_) {
    if (!out.empty()) out.push_back(';');
    out += k;
    out.push_back('=');
    out += v;
  }
  return out;
}

std::optional<std::string_view> ParamSet::get(std::string_view key) const {
  const auto it = std::lower_bound(pairs_.begin(), pairs_.end(), key,
                                   [](const auto& p, std::string_view k) { return p.first < k; });
  if (it == pairs_.end() || it->first != key) return std::nullopt;
  return std::string_view(it->second);
}

std::optional<std::uint64_t> ParamSet::get_uint(std::string_view key) const {
  const auto v = get(key);
  if (!v) return std::nullopt;
  return parse_u64(*v);
}

ParamSet& ParamSet::set(std::string_view key, std::string_view value) {
  validate_pair(key, value);
  const auto it = std::lower_bound(pairs_.begin(), pairs_.end(), key,
                                   [](const auto& p, std::string_view k) { return p.first < k; });
  if (it != pairs_.end() && it->first == key) {
    it->second = std::string(value);
  } else {
    pairs_.emplace(it, std::string(key), std::string(value));
  }
  return *this;
}

ParamSet& ParamSet::erase(std::string_view key) {
  std::erase_if(pairs_, [&](const auto& p) { return p.first == key; });
  return *this;
}

ByteRange requested_range(const ParamSet& params, std::uint64_t size) {
  return ByteRange{params.get_uint("off").value_or(0), params.get_uint("len").value_or(size)};
}

std::string_view key_prefix(std::string_view key) {
  return key.substr(0, key.find('/'));
}

std::string object_id(std::string_view key, const ParamSet& params) {
  std::string id(key);
  id.push_back('?');
  id += params.canonical();
  return id;
}

TraceStats compute_stats(std::span<const RequestRecord> records) {
  TraceStats stats;
  if (records.empty()) return stats;
  std::unordered_set<std::string_view> keys;
  std::unordered_set<std::string_view> contents;
  for (const RequestRecord& r : records) {
    keys.insert(r.key);
    contents.insert(r.content_id);
    stats.bytes += r.size;
  }
  stats.records = records.size();
  stats.unique_keys = keys.size();
  stats.unique_content_ids = contents.size();
  stats.duration_us = records.back().timestamp_us - records.front().timestamp_us;
  return stats;
}

std::uint64_t footprint_bytes(std::span<const RequestRecord> records) {
  std::unordered_map<std::string, std::uint64_t> sizes;
  for (const RequestRecord& r : records) sizes[object_id(r)] = r.size;
  std::uint64_t total = 0;
  for (const auto& [id, size] : sizes) total += size;
  return total;
}

double footprint_redundancy(std::span<const RequestRecord> records) {
  std::unordered_map<std::string, const RequestRecord*> objects;
  for (const RequestRecord& r : records) objects[object_id(r)] = &r;
  std::map<std::string_view, std::pair<std::uint64_t, std::uint64_t>> groups;  // total, max
  std::uint64_t total = 0;
  for (const auto& [id, r] : objects) {
    auto& g = groups[r->content_id];
    g.first += r->size;
    g.second = std::max(g.second, r->size);
    total += r->size;
  }
  if (total == 0) return 0.0;
  std::uint64_t redundant = 0;
  for (const auto& [cid, g] : groups) redundant += g.first - g.second;
  return static_cast<double>(redundant) / static_cast<double>(total);
}

void validate_records(std::span<const RequestRecord> records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RequestRecord& r = records[i];
    const std::size_t line = i + 2;
    if (r.key.empty() || has_reserved_char(r.key)) throw ParseError(line, "key", "empty or contains a reserved character");
    if (r.size == 0) throw ParseError(line, "size", "size must be positive");
    if (r.content_id.empty() || has_reserved_char(r.content_id)) {
      throw ParseError(line, "content_id", "empty or contains a reserved character");
    }
    if (has_reserved_char(r.format)) throw ParseError(line, "format", "contains a reserved character");
    if (i > 0 && r.timestamp_us < records[i - 1].timestamp_us) {
      throw ParseError(line, "ts_us", "timestamp regression (" + std::to_string(r.timestamp_us) + " < " +
                                          std::to_string(records[i - 1].timestamp_us) + ")");
    }
  }
}

std::vector<RequestRecord> parse_trace(std::istream& in) {
  std::vector<RequestRecord> records;
  std::string line;
  if (!std::getline(in, line)) return records;
  if (line != kTraceHeader) throw ParseError(1, "header", "expected '" + std::string(kTraceHeader) + "'");

  std::size_t line_no = 1;
  bool saw_blank = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      saw_blank = true;
      continue;
    }
    if (saw_blank) throw ParseError(line_no - 1, "row", "blank line inside trace");

    // The params column may itself have been written with ',' between pairs;
    // the two leading and six trailing columns are fixed, so everything in
    // between belongs to params.
    const std::vector<std::string_view> f = split(line, ',');
    if (f.size() < 9) {
      throw ParseError(line_no, "row", "expected 9 columns, got " + std::to_string(f.size()));
    }
    const std::size_t tail = f.size() - 6;
    auto field = [&](std::size_t idx) { return idx < 2 ? f[idx] : f[tail + (idx - 3)]; };

    RequestRecord r;
    const auto ts = parse_u64(f[0]);
    if (!ts) throw ParseError(line_no, "ts_us", "not a non-negative integer: '" + std::string(f[0]) + "'");
    r.timestamp_us = *ts;
    r.key = std::string(field(1));
    if (r.key.empty()) throw ParseError(line_no, "key", "empty key");

    std::string params_text;
    for (std::size_t i = 2; i < tail; ++i) {
      if (f.size() > 9 && !f[i].empty() && f[i].find('=') == std::string_view::npos) {
        throw ParseError(line_no, "params", "unexpected column '" + std::string(f[i]) + "'");
      }
      if (!params_text.empty() && !f[i].empty()) params_text.push_back(';');
      params_text += f[i];
    }
    try {
      r.params = ParamSet::parse(params_text);
    } catch (const ParameterError& e) {
      throw ParseError(line_no, "params", e.what());
    }

    const auto size = parse_u64(field(3));
    if (!size || *size == 0) throw ParseError(line_no, "size", "must be a positive integer: '" + std::string(field(3)) + "'");
    r.size = *size;

    r.content_id = std::string(field(4));
    if (r.content_id.empty()) throw ParseError(line_no, "content_id", "empty content_id");
    try {
      r.modality = parse_modality(field(5));
    } catch (const ParameterError& e) {
      throw ParseError(line_no, "modality", e.what());
    }
    r.format = std::string(field(6));
    if (!field(7).empty()) {
      try {
        r.simhash = SimHash::from_hex(field(7));
      } catch (const ParameterError& e) {
        throw ParseError(line_no, "simhash", e.what());
      }
    }
    if (!field(8).empty()) {
      const auto lat = parse_u64(field(8));
      if (!lat) throw ParseError(line_no, "origin_lat_us", "not a non-negative integer: '" + std::string(field(8)) + "'");
      r.origin_latency_override_us = *lat;
    }
    if (!records.empty() && r.timestamp_us < records.back().timestamp_us) {
      throw ParseError(line_no, "ts_us", "timestamp regression (" + std::to_string(r.timestamp_us) + " < " +
                                             std::to_string(records.back().timestamp_us) + ")");
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RequestRecord> parse_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open trace '" + path.string() + "'");
  return parse_trace(in);
}

void write_trace(std::ostream& out, std::span<const RequestRecord> records) {
  validate_records(records);
  out << kTraceHeader << '\n';
  for (const RequestRecord& r : records) {
    out << r.timestamp_us << ',' << r.key << ',' << r.params.canonical() << ',' << r.size << ',' << r.content_id
        << ',' << to_string(r.modality) << ',' << r.format << ',';
    if (r.simhash) out << r.simhash->to_hex();
    out << ',';
    if (r.origin_latency_override_us) out << *r.origin_latency_override_us;
    out << '\n';
  }
}

void write_trace(const std::filesystem::path& path, std::span<const RequestRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write trace '" + path.string() + "'");
  write_trace(out, records);
  if (!out.flush()) throw Error("failed writing trace '" + path.string() + "'");
}

}  // namespace cogent
