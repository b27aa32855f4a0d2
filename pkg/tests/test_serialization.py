import json

import numpy as np
import pytest

from freedilation.operator_core import State
from freedilation.serialization import (
    dump_matrix,
    dump_state,
    load_matrix,
    load_state,
    matrix_from_obj,
    matrix_to_obj,
    state_from_obj,
    state_to_obj,
)


def test_matrix_round_trip_is_bit_exact():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    obj = matrix_to_obj(m)
    back = matrix_from_obj(json.loads(json.dumps(obj)))
    assert np.array_equal(back, m)


def test_matrix_obj_shape():
    obj = matrix_to_obj(np.array([[1.0 + 2.0j]]))
    assert obj == {"rows": 1, "cols": 1, "data": [[[1.0, 2.0]]]}


def test_matrix_from_obj_validates():
    with pytest.raises(ValueError):
        matrix_from_obj({"rows": 2, "cols": 1, "data": [[[1.0, 0.0]]]})
    with pytest.raises(ValueError):
        matrix_from_obj({"rows": 1, "cols": 1, "data": [[[1.0]]]})
    with pytest.raises(ValueError):
        matrix_from_obj({"rows": 1, "cols": 1})


def test_state_round_trips():
    v = State.from_vector(np.array([0.6, 0.8j]))
    obj = state_to_obj(v)
    assert obj["kind"] == "vector" and obj["dim"] == 2
    back = state_from_obj(json.loads(json.dumps(obj)))
    assert np.array_equal(back.vector, v.vector)

    rho = State.from_density(np.array([[0.75, 0.1], [0.1, 0.25]]))
    back2 = state_from_obj(state_to_obj(rho))
    assert np.array_equal(back2.density, rho.density)


def test_state_from_obj_validates():
    with pytest.raises(ValueError):
        state_from_obj({"kind": "vector", "dim": 2, "data": [[1.0, 0.0]]})
    with pytest.raises(ValueError):
        state_from_obj({"kind": "spin", "dim": 1, "data": [[1.0, 0.0]]})


def test_file_round_trip(tmp_path):
    m = np.array([[0.5 + 0.25j, -1.0], [0.0, 2.0]])
    path = tmp_path / "m.json"
    dump_matrix(m, path)
    assert np.array_equal(load_matrix(path), m)

    s = State.from_vector(np.array([1.0, 0.0]))
    spath = tmp_path / "s.json"
    dump_state(s, spath)
    assert np.array_equal(load_state(spath).vector, s.vector)


def test_nan_rejected_on_emit():
    with pytest.raises(ValueError):
        matrix_to_obj(np.array([[np.inf]]))
