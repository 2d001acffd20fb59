import json

import numpy as np
import pytest

from wittenlab import constants
from wittenlab.errors import MissingConstants


def test_levels_strictly_increasing(consts):
    e = np.array(consts["e"])
    assert e[0] > 0
    assert np.all(np.diff(e) > 0)
    assert len(e) == 8


def test_oracle_self_report(consts):
    assert consts["oracle"]["richardson_gap"] <= 1e-8
    assert consts["oracle"]["n"] == 4096
    assert consts["oracle"]["L"] == 8.0


def test_gap_stable_under_doubling(consts):
    c2 = constants.compute_constants(base_n=8192)
    g1 = (consts["e"][1] - consts["e"][0]) / consts["e"][0]
    g2 = (c2["e"][1] - c2["e"][0]) / c2["e"][0]
    assert abs(g1 - g2) / g1 <= 1e-8


def test_write_idempotent(tmp_path):
    p1 = tmp_path / "c1.json"
    p2 = tmp_path / "c2.json"
    constants.write_constants(p1)
    constants.write_constants(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_env_override(tmp_path, monkeypatch, consts):
    path = tmp_path / "alt.json"
    data = dict(consts)
    data["xi1_0"] = 123.0
    path.write_text(json.dumps(data))
    monkeypatch.setenv(constants.ENV_VAR, str(path))
    loaded = constants.load_constants()
    assert loaded["xi1_0"] == 123.0


def test_missing_fields_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"e": [1.0]}))
    with pytest.raises(MissingConstants):
        constants.load_constants(path)


def test_missing_file_without_compute(tmp_path):
    with pytest.raises(MissingConstants):
        constants.load_constants(tmp_path / "nope.json", compute_if_missing=False)
