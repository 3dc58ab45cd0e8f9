import math
import subprocess

import numpy as np
import pytest

from sagqg.artifacts import canonical_json, config_hash, fmt, metadata, read_csv, write_csv, write_json


def test_fmt():
    assert fmt(3) == "3"
    assert fmt(np.int64(7)) == "7"
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(math.inf) == "inf"


def test_canonical_json():
    assert canonical_json({"b": 1, "a": [1.5, math.inf]}) == '{"a":[1.5,"inf"],"b":1}'


def test_config_hash_matches_git(tmp_path):
    cfg = {"gate": "pauli-x", "omega0": 3.5}
    blob = tmp_path / "blob"
    blob.write_text(canonical_json(cfg))
    try:
        out = subprocess.run(["git", "hash-object", str(blob)], capture_output=True, text=True, check=True)
    except (OSError, subprocess.CalledProcessError):
        pytest.skip("git not available")
    assert config_hash(cfg) == out.stdout.strip()


def test_csv_round_trip(tmp_path):
    meta = metadata("test", {"x": 1})
    path = write_csv(tmp_path / "a.csv", {"t": [0.0, 0.5], "v": [1, math.inf]}, meta)
    got_meta, cols = read_csv(path)
    assert got_meta["command"] == "test"
    assert np.array_equal(cols["t"], [0.0, 0.5])
    assert cols["v"][1] == math.inf
    with pytest.raises(ValueError):
        write_csv(tmp_path / "b.csv", {"t": [1, 2], "v": [1]})


def test_json_sorted(tmp_path):
    path = write_json(tmp_path / "a.json", {"z": 1, "a": np.float64(2.0)}, {"k": "v"})
    text = path.read_text()
    assert text.index('"a"') < text.index('"metadata"') < text.index('"z"')
