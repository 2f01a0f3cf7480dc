import json
import math

import numpy as np
from hypothesis import given, strategies as st

from holderdini.grid import GridSpec, GridField
from holderdini.io import field_records, fmt, to_json, write_csv, write_ndjson


def test_fmt():
    assert fmt(True) == "true"
    assert fmt(np.int64(7)) == "7"
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt("x") == "x"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert float(fmt(x)) == x
    assert json.loads(to_json([x]))[0] == x


def test_non_finite_json_is_null():
    assert json.loads(to_json({"a": math.inf, "b": math.nan})) == {"a": None, "b": None}


def test_csv_quotes(tmp_path):
    path = write_csv(tmp_path / "sub" / "t.csv", ["a", "b"], [("x,y", 1.5), ('q"', 2)])
    assert path.read_text() == 'a,b\n"x,y",1.5\n"q""",2\n'


def test_ndjson(tmp_path):
    grid = GridSpec(N=16, M=8, L=1.0)
    values = np.arange(9 * 16, dtype=float).reshape(9, 16)
    recs = list(field_records(GridField(values, grid), "u"))
    path = write_ndjson(tmp_path / "f.ndjson", recs)
    lines = [json.loads(s) for s in path.read_text().splitlines()]
    assert len(lines) == 9 and lines[8]["t"] == 1.0 and lines[1]["values"] == list(values[1])
