# Copyright 2026 The cogent-sim Authors
# Licensed under the Apache License, Version 2.0. See LICENSE for terms.
"""Python front end for the generative-hit CDN cache simulator."""

import json

from ._core import (
    CapacityError,
    CogentError,
    ConfigError,
    ParameterError,
    ParseError,
    RangeError,
    RequestRecord,
    SchemaError,
    StorageError,
    SyntheticSpec,
    TilingError,
    TrainingError,
    config_keys,
    estimate_latency,
    generate_synthetic_trace,
    hamming_distance,
    merge_blocks,
    parse_trace,
    parse_trace_text,
    percentile,
    resolved_config,
    split_block,
    trace_stats,
    train_tree,
    training_samples,
    write_trace,
)
from . import _core

__all__ = [
    "CapacityError",
    "CogentError",
    "ConfigError",
    "ParameterError",
    "ParseError",
    "RangeError",
    "RequestRecord",
    "SchemaError",
    "StorageError",
    "SyntheticSpec",
    "TilingError",
    "TrainingError",
    "config_keys",
    "estimate_latency",
    "generate",
    "generate_synthetic_trace",
    "hamming_distance",
    "merge_blocks",
    "parse_trace",
    "parse_trace_text",
    "percentile",
    "resolved_config",
    "simulate",
    "split_block",
    "trace_stats",
    "train_tree",
    "training_samples",
    "write_trace",
]


def generate(**fields):
    """Synthetic trace from SyntheticSpec field overrides."""
    spec = SyntheticSpec()
    for name, value in fields.items():
        if not hasattr(spec, name):
            raise ParameterError(f"unknown synthetic spec field '{name}'")
        setattr(spec, name, value)
    return generate_synthetic_trace(spec)


def simulate(records, **options):
    """Runs one configuration. Returns the report as a dict, with the series CSV
    under "series_csv" and the summary line under "summary"."""
    report_json, series, summary = _core.simulate(records, options)
    report = json.loads(report_json)
    report["series_csv"] = series
    report["summary"] = summary
    return report
