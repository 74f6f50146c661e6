import json

import numpy as np
import pytest

from devur.errors import DimensionMismatch, InvalidState
from devur.io import (
    complex_from_json,
    csv_text,
    matrix_from_json,
    matrix_to_json,
    observable_from_json,
    observable_to_json,
    read_csv,
    state_from_json,
    state_to_json,
)
from devur.numkit import Observable, State, random_pure_state


def test_state_round_trip_bitwise():
    rng = np.random.default_rng(41)
    psi = State.pure(random_pure_state(3, rng))
    back = state_from_json(json.loads(json.dumps(state_to_json(psi))))
    assert np.array_equal(back.vector, psi.vector)
    rho = State.mixed(np.diag([0.25, 0.75]).astype(complex))
    back = state_from_json(json.loads(json.dumps(state_to_json(rho))))
    assert np.array_equal(back.density, rho.density) and not back.is_pure


def test_observable_round_trip():
    o = Observable(np.array([[0, -1j], [1j, 0]]), label="Y")
    back = observable_from_json(json.loads(json.dumps(observable_to_json(o))))
    assert np.array_equal(back.matrix, o.matrix) and back.label == "Y"
    assert np.array_equal(observable_from_json(matrix_to_json(o.matrix)).matrix, o.matrix)


def test_malformed_inputs():
    with pytest.raises(InvalidState):
        complex_from_json([1, 2, 3])
    with pytest.raises(DimensionMismatch):
        matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0]]})
    with pytest.raises(InvalidState):
        matrix_from_json({"rows": 2})
    with pytest.raises(InvalidState):
        state_from_json({"kind": "thermal"})
    assert complex_from_json(2) == 2 + 0j


def test_csv_round_trip():
    rows = [(0.1, 1 / 3, None), (2.0, float("nan"), 1e-300)]
    header, back = read_csv(csv_text(["a", "b", "c"], rows))
    assert header == ["a", "b", "c"]
    assert back[0] == [0.1, 1 / 3, None] and back[1] == [2.0, None, 1e-300]
