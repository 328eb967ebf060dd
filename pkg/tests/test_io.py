import json

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from sqsflow import io as aio


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_floats_round_trip_bit_for_bit(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "t.csv"
    n = aio.write_csv(path, {"v": np.array(values), "i": np.arange(len(values))})
    back = aio.read_csv(path)
    assert n == len(values)
    assert np.array_equal(back["v"], np.array(values))
    assert back["i"].tolist() == list(range(len(values)))


def test_csv_layout(tmp_path):
    path = tmp_path / "t.csv"
    aio.write_csv(path, {"a": [0.1, 2.0], "ok": [True, False], "s": ["x", "y"]})
    raw = path.read_bytes()
    assert raw == b"a,ok,s\n0.1,1,x\n2.0,0,y\n"
    assert aio.read_csv(path)["s"].tolist() == ["x", "y"]


def test_csv_rejects_ragged_columns(tmp_path):
    import pytest

    with pytest.raises(ValueError):
        aio.write_csv(tmp_path / "t.csv", {"a": [1, 2], "b": [1]})


def test_identical_writes_hash_identically(tmp_path):
    cols = {"x": np.linspace(0, 1, 7) ** 3}
    aio.write_csv(tmp_path / "a.csv", cols)
    aio.write_csv(tmp_path / "b.csv", cols)
    assert aio.sha256(tmp_path / "a.csv") == aio.sha256(tmp_path / "b.csv")


def test_obj_export(tmp_path):
    v = np.arange(12, dtype=float).reshape(4, 3)
    n = aio.write_obj(tmp_path / "m.obj", v, v, np.array([[0, 1, 2, 3]]))
    lines = (tmp_path / "m.obj").read_text().splitlines()
    assert n == 1
    assert lines.count("f 1//1 2//2 3//3 4//4") == 1
    assert sum(line.startswith("vn ") for line in lines) == 4


def test_json_is_sorted_and_round_trips(tmp_path):
    aio.write_json(tmp_path / "m.json", {"b": 1, "a": [1.5]})
    text = (tmp_path / "m.json").read_text()
    assert text.index('"a"') < text.index('"b"')
    assert aio.read_json(tmp_path / "m.json") == json.loads(text)
