// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>

#include "cogent/config.hpp"
#include "cogent/controller.hpp"
#include "cogent/engine.hpp"
#include "cogent/error.hpp"
#include "cogent/genhit.hpp"
#include "cogent/trace.hpp"

namespace py = pybind11;
using namespace cogent;

namespace {

RunConfig config_from(const py::dict& options) {
  RunConfig cfg;
  for (const auto& [k, v] : options) {
    const std::string key = py::str(k);
    std::string value;
    if (py::isinstance<py::bool_>(v)) {
      value = v.cast<bool>() ? "on" : "off";
    } else {
      value = py::str(v);
    }
    cfg.set(key, value);
  }
  return cfg;
}

py::bytes to_bytes(const Bytes& b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

Bytes from_bytes(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Generative-hit CDN cache simulator core";

  auto base = py::register_exception<Error>(m, "CogentError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<TilingError>(m, "TilingError", base.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", base.ptr());
  py::register_exception<TrainingError>(m, "TrainingError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<StorageError>(m, "StorageError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("objects", &SyntheticSpec::objects)
      .def_readwrite("groups", &SyntheticSpec::groups)
      .def_readwrite("zipf_alpha", &SyntheticSpec::zipf_alpha)
      .def_readwrite("mean_interarrival_us", &SyntheticSpec::mean_interarrival_us)
      .def_readwrite("requests", &SyntheticSpec::requests)
      .def_readwrite("seed", &SyntheticSpec::seed)
      .def_readwrite("image_fraction", &SyntheticSpec::image_fraction)
      .def_readwrite("block_size", &SyntheticSpec::block_size)
      .def_readwrite("image_size_min", &SyntheticSpec::image_size_min)
      .def_readwrite("image_size_max", &SyntheticSpec::image_size_max)
      .def_readwrite("intra_group_distance", &SyntheticSpec::intra_group_distance)
      .def_readwrite("match_threshold", &SyntheticSpec::match_threshold);

  py::class_<RequestRecord>(m, "RequestRecord")
      .def_readonly("timestamp_us", &RequestRecord::timestamp_us)
      .def_readonly("key", &RequestRecord::key)
      .def_property_readonly("params", [](const RequestRecord& r) { return r.params.canonical(); })
      .def_readonly("size", &RequestRecord::size)
      .def_readonly("content_id", &RequestRecord::content_id)
      .def_property_readonly("modality", [](const RequestRecord& r) { return std::string(to_string(r.modality)); })
      .def_readonly("format", &RequestRecord::format)
      .def_property_readonly("simhash",
                             [](const RequestRecord& r) -> py::object {
                               if (!r.simhash) return py::none();
                               return py::str(r.simhash->to_hex());
                             })
      .def_readonly("origin_latency_us", &RequestRecord::origin_latency_override_us)
      .def("__eq__", [](const RequestRecord& a, const RequestRecord& b) { return a == b; })
      .def("__repr__", [](const RequestRecord& r) {
        return "<RequestRecord ts=" + std::to_string(r.timestamp_us) + " key=" + r.key + " params=" +
               r.params.canonical() + ">";
      });

  m.def("generate_synthetic_trace", &generate_synthetic_trace, py::arg("spec"),
        "Deterministic synthetic trace for a spec.");
  m.def(
      "parse_trace", [](const std::string& path) { return parse_trace(std::filesystem::path(path)); },
      py::arg("path"));
  m.def(
      "parse_trace_text",
      [](const std::string& text) {
        std::istringstream in(text);
        return parse_trace(in);
      },
      py::arg("text"));
  m.def(
      "write_trace",
      [](const std::string& path, const std::vector<RequestRecord>& records) {
        write_trace(std::filesystem::path(path), records);
      },
      py::arg("path"), py::arg("records"));
  m.def(
      "trace_stats",
      [](const std::vector<RequestRecord>& records) {
        const TraceStats s = compute_stats(records);
        py::dict d;
        d["records"] = s.records;
        d["unique_keys"] = s.unique_keys;
        d["unique_content_ids"] = s.unique_content_ids;
        d["bytes"] = s.bytes;
        d["duration_us"] = s.duration_us;
        d["footprint_bytes"] = footprint_bytes(records);
        d["footprint_redundancy"] = footprint_redundancy(records);
        return d;
      },
      py::arg("records"));

  m.def(
      "config_keys", [] { return RunConfig::keys(); }, "Every accepted run configuration key.");
  m.def(
      "resolved_config", [](const py::dict& options) { return config_from(options).echo(); }, py::arg("options"));

  m.def(
      "simulate",
      [](const std::vector<RequestRecord>& records, const py::dict& options) {
        const RunConfig cfg = config_from(options);
        std::string json, csv, summary;
        {
          py::gil_scoped_release release;
          const PreparedRun prepared = prepare_run(cfg, records);
          const SimReport r = run(records, prepared.settings);
          json = report_json(r);
          csv = series_csv(r);
          summary = summary_line(r);
        }
        return py::make_tuple(json, csv, summary);
      },
      py::arg("records"), py::arg("options"), "Runs one simulation; returns (report_json, series_csv, summary_line).");

  m.def(
      "train_tree",
      [](const std::vector<RequestRecord>& records, const py::dict& options) {
        const RunConfig cfg = config_from(options);
        const auto samples = build_training_samples(records, cfg.training);
        if (samples.empty()) throw TrainingError("the training prefix yields no labelled samples");
        const DecisionTree tree = train(samples, cfg.tree_config);
        py::dict d;
        d["tree"] = tree.serialize();
        d["samples"] = samples.size();
        d["depth"] = tree.depth();
        d["leaves"] = tree.leaf_count();
        d["training_accuracy"] = training_accuracy(tree, samples);
        return d;
      },
      py::arg("records"), py::arg("options"));

  m.def(
      "training_samples",
      [](const std::vector<RequestRecord>& records, const py::dict& options) {
        const RunConfig cfg = config_from(options);
        py::list out;
        for (const TrainingSample& s : build_training_samples(records, cfg.training)) {
          py::dict d;
          d["file_type"] = s.features.file_type;
          d["file_size"] = s.features.file_size;
          d["age"] = s.features.age;
          d["recency"] = s.features.recency;
          d["frequency"] = s.features.frequency;
          d["label"] = s.label;
          out.append(d);
        }
        return out;
      },
      py::arg("records"), py::arg("options"));

  m.def(
      "split_block",
      [](const py::bytes& donor, std::uint64_t offset, std::uint64_t length) {
        return to_bytes(split_block(from_bytes(donor), offset, length));
      },
      py::arg("donor"), py::arg("offset"), py::arg("length"));
  m.def(
      "merge_blocks",
      [](const std::vector<std::pair<std::uint64_t, py::bytes>>& parts) {
        std::vector<std::pair<std::uint64_t, Bytes>> native;
        native.reserve(parts.size());
        for (const auto& [off, b] : parts) native.emplace_back(off, from_bytes(b));
        return to_bytes(merge_blocks(std::move(native)));
      },
      py::arg("parts"));
  m.def(
      "percentile",
      [](const std::vector<std::uint64_t>& values, double p) { return percentile(values, p); }, py::arg("values"),
      py::arg("p"));
  m.def(
      "estimate_latency",
      [](int scenario, std::uint64_t size) {
        if (scenario < 1 || scenario > static_cast<int>(kScenarioCount)) {
          throw ParameterError("scenario must be 1..5");
        }
        return estimate_latency(CostModel{}, kAllScenarios[scenario - 1], size);
      },
      py::arg("scenario"), py::arg("size"), "Default-model generation latency in microseconds.");
  m.def("hamming_distance", [](const std::string& a, const std::string& b) {
    return hamming_distance(SimHash::from_hex(a), SimHash::from_hex(b));
  });
}
