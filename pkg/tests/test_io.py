import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metrepair import io as mio


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1e6, allow_nan=False) | st.just(float("inf")),
                min_size=9, max_size=9))
def test_matrix_round_trip(tmp_path_factory, vals):
    path = tmp_path_factory.mktemp("m") / "m.txt"
    a = np.array(vals).reshape(3, 3)
    mio.write_matrix(path, a)
    assert np.array_equal(mio.read_matrix(path), a)


@pytest.mark.parametrize("text, line", [
    ("3\n0 1 2\n1 0 1\n", 3),
    ("2\n0 1 2\n1 0\n", 2),
    ("x\n", 1),
    ("2\n0 -\n1 0\n", 2),
    ("", 1),
])
def test_format_errors(tmp_path, text, line):
    path = tmp_path / "m.txt"
    path.write_text(text)
    with pytest.raises(mio.FormatError, match=f"line {line}:"):
        mio.read_matrix(path)


def test_masses(tmp_path):
    assert mio.read_masses(None, 4).tolist() == [0.25] * 4
    path = tmp_path / "w.txt"
    mio.write_masses(path, [0.5, 0.5])
    assert mio.read_masses(path, 2).tolist() == [0.5, 0.5]
    with pytest.raises(mio.FormatError):
        mio.read_masses(path, 3)


def test_index_list(tmp_path):
    path = tmp_path / "s.txt"
    mio.write_index_list(path, [3, 1, 4])
    assert mio.read_index_list(path) == [3, 1, 4]
    path.write_text("1\nfoo\n")
    with pytest.raises(mio.FormatError, match="line 2"):
        mio.read_index_list(path)


def test_json_stable_and_inf():
    text = mio.dumps({"b": float("inf"), "a": np.float64(1.5), "c": (1, 2)})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": 1.5, "b": "inf", "c": [1, 2]}
