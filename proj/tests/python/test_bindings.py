# Copyright 2026 The cogent-sim Authors
# Licensed under the Apache License, Version 2.0. See LICENSE for terms.

import csv
import io
import random

import pytest

import cogent_sim as cs


def small_trace(seed=1, requests=3000):
    return cs.generate(requests=requests, objects=200, groups=40, seed=seed)


def test_split_merge_round_trip():
    rng = random.Random(3)
    for _ in range(50):
        payload = bytes(rng.randrange(256) for _ in range(rng.randrange(1, 3000)))
        parts, off = [], 0
        while off < len(payload):
            n = min(rng.randrange(1, 500), len(payload) - off)
            parts.append((off, cs.split_block(payload, off, n)))
            off += n
        rng.shuffle(parts)
        assert cs.merge_blocks(parts) == payload
    with pytest.raises(cs.RangeError):
        cs.split_block(b"abc", 2, 5)
    with pytest.raises(cs.TilingError):
        cs.merge_blocks([(0, b"ab"), (3, b"d")])


def test_percentile_and_hamming():
    assert cs.percentile([5], 0.99) == 5
    assert cs.percentile(list(range(1, 101)), 0.99) == 99
    with pytest.raises(cs.ParameterError):
        cs.percentile([], 0.5)
    assert cs.hamming_distance("0" * 32, "0" * 31 + "3") == 2


def test_trace_text_round_trip(tmp_path):
    records = small_trace()
    path = tmp_path / "t.csv"
    cs.write_trace(str(path), records)
    again = cs.parse_trace(str(path))
    assert len(again) == len(records)
    assert [r.key for r in again] == [r.key for r in records]
    assert cs.trace_stats(again) == cs.trace_stats(records)
    with pytest.raises(cs.ParseError):
        cs.parse_trace_text("ts_us,key\n1,a\n")


def test_simulate_report_shape():
    records = small_trace()
    report = cs.simulate(records, arch="original", policy="lru")
    counters = report["counters"]
    assert report["requests"] == len(records)
    assert counters["hits"] + counters["misses"] + counters["pseudo_misses"] + counters["shielded"] == len(records)
    rows = list(csv.reader(io.StringIO(report["series_csv"])))
    assert rows[0] == ["window_start_us", "mean_latency_us", "p99_us", "origin_bps", "redundancy_rate"]
    assert len(report["summary"].split()) == 5
    with pytest.raises(cs.ConfigError):
        cs.simulate(records, no_such_key=1)


def test_cogent_lowers_mean_latency():
    records = cs.generate(requests=20000, objects=800, groups=100, seed=2)
    original = cs.simulate(records, arch="original")
    cogent = cs.simulate(records, arch="cogent")
    assert cogent["latency_us"]["mean"] < original["latency_us"]["mean"]


def encode_and_predict(tree_text, sample):
    categories, nodes = {}, {}
    for line in tree_text.splitlines():
        tok = line.split()
        if not tok or tok[0] == "tree":
            continue
        if tok[0] == "category":
            categories[tok[2]] = int(tok[1])
        elif tok[0] == "node":
            nodes[int(tok[1])] = ("node", int(tok[3]), float(tok[5]), int(tok[7]), int(tok[9]))
        elif tok[0] == "leaf":
            nodes[int(tok[1])] = ("leaf", tok[3] == "1")
    x = [
        float(categories.get(sample["file_type"], -1)),
        float(sample["file_size"]),
        float(sample["age"]),
        float(sample["recency"]),
        float(sample["frequency"]),
    ]
    node = nodes[0]
    while node[0] == "node":
        _, feature, threshold, left, right = node
        node = nodes[left if x[feature] <= threshold else right]
    return node[1]


def test_training_accuracy_matches_rescoring():
    records = small_trace(seed=5, requests=5000)
    result = cs.train_tree(records, {})
    samples = cs.training_samples(records, {})
    assert result["samples"] == len(samples)
    correct = sum(encode_and_predict(result["tree"], s) == s["label"] for s in samples)
    assert result["training_accuracy"] == pytest.approx(correct / len(samples), abs=1e-12)
    assert cs.train_tree(records, {}) == result


def test_resolved_config_lists_every_key():
    lines = cs.resolved_config({"policy": "arc"}).splitlines()
    resolved = dict(line.split(" = ", 1) for line in lines)
    assert list(resolved) == list(cs.config_keys())
    assert resolved["policy"] == "arc"
