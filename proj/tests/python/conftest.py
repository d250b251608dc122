# Copyright 2026 The cogent-sim Authors
# Licensed under the Apache License, Version 2.0. See LICENSE for terms.

import os
import subprocess

import pytest


@pytest.fixture(scope="session")
def cli():
    binary = os.environ.get("COGENT_SIM_BIN")
    if not binary or not os.path.exists(binary):
        pytest.skip("COGENT_SIM_BIN is not set")

    def invoke(*args, check=True, env=None):
        merged = dict(os.environ)
        if env:
            merged.update(env)
        proc = subprocess.run([binary, *map(str, args)], capture_output=True, text=True, env=merged)
        if check and proc.returncode != 0:
            raise AssertionError(f"{args} exited {proc.returncode}: {proc.stderr}")
        return proc

    return invoke


@pytest.fixture(scope="session")
def data_dir():
    return os.environ.get("COGENT_SIM_DATA", os.path.join(os.path.dirname(__file__), "..", "..", "data"))
