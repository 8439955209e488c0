import json
import os

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualmink import group as grp
from dualmink import io
from dualmink.group import GroupError


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=20))
def test_float_roundtrip_is_exact(xs):
    back = json.loads(io.dumps({"x": xs}))["x"]
    assert back == xs


def test_nonfinite_become_null():
    assert json.loads(io.dumps({"a": float("inf"), "b": float("nan")})) == {"a": None, "b": None}


def test_measure_formats(tmp_path):
    doc = {"n": 2, "atoms": [{"u": [2, 0], "w": 1}, {"u": [-1, 0], "w": 1}]}
    mu = io.measure_from_dict(doc)
    assert np.allclose(mu.directions[0], [1, 0])
    again = io.measure_from_dict(io.measure_to_dict(mu))
    assert np.array_equal(again.directions, mu.directions)
    cols = io.measure_from_dict({"directions": [[1, 0], [-1, 0]], "weights": [1, 1]})
    assert cols.size == 2
    for bad in ({"n": 2}, {"n": 2, "atoms": [{"u": [1, 0], "w": -1}]},
                {"n": 3, "atoms": [{"u": [1, 0], "w": 1}]}, {"atoms": [{"u": [0, 0], "w": 1}]},
                {"atoms": [{"u": ["a", 0], "w": 1}]}):
        with pytest.raises(io.InputError):
            io.measure_from_dict(bad)


def test_group_formats():
    assert io.group_from_dict({"n": 2, "generators": [[[-1, 0], [0, -1]]]}).order == 2
    assert io.group_from_dict({"named": "klein4"}).order == 4
    assert io.group_from_dict({"named": "dihedral2", "args": [4]}).order == 8
    assert io.group_from_dict({"named": "sign", "n": 3}).n == 3
    G = grp.prism_group(3)
    assert io.group_from_dict(io.group_to_dict(G)).order == G.order
    with pytest.raises(io.InputError):
        io.group_from_dict({"named": "nope"})
    with pytest.raises(io.InputError):
        io.group_from_dict({})
    with pytest.raises(GroupError):
        io.group_from_dict({"generators": [[[2, 0], [0, 1]]]})


def test_body_formats():
    d = {"n": 2, "normals": [[1, 0], [-1, 0], [0, 1], [0, -1]], "h": [1, 1, 2, 2]}
    B, c = io.body_from_dict(d)
    assert c == 1.0 and B.m == 4
    B2, c2 = io.body_from_dict({"body": io.body_to_dict(B), "scale": 3.0})
    assert c2 == 3.0 and np.array_equal(B2.h, B.h)
    with pytest.raises(io.InputError):
        io.body_from_dict({"normals": [[1, 0]], "h": [1]})


def test_config():
    cfg = io.config_from_dict({"q": 1.5, "quad": {"nodes": 1000}}, max_iters=5, grad_tol=None)
    assert cfg.q == 1.5 and cfg.max_iters == 5 and cfg.grad_tol == 1e-6
    with pytest.raises(io.InputError):
        io.config_from_dict({"q": -1})
    with pytest.raises(io.InputError):
        io.config_from_dict({"q": 1, "bogus": 2})


def test_read_errors(tmp_path):
    with pytest.raises(io.InputError):
        io.read_json(tmp_path / "missing.json")
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(io.InputError):
        io.read_json(p)


def test_atomic_write(tmp_path, monkeypatch):
    target = tmp_path / "out.json"
    io.write_json(target, {"a": 1})
    assert json.loads(target.read_text()) == {"a": 1}

    def boom(*a):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        io.write_json(target, {"a": 2})
    assert json.loads(target.read_text()) == {"a": 1}
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out.json"]
    with pytest.raises(TypeError):
        io.write_json(tmp_path / "other.json", {"x": object()})
    assert not (tmp_path / "other.json").exists()
