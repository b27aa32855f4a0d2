"""JSON wire formats for matrices and states.

Matrix: ``{"rows": r, "cols": c, "data": [[[re, im], ...], ...]}`` with
``data[i][j]`` the ``(i, j)`` entry.  State: ``{"kind": "vector"|"density",
"dim": d, "data": ...}`` where a vector's data is a list of ``[re, im]`` pairs
and a density's data is matrix-style.  Round trips are bit-exact: Python's
float repr is shortest-round-trip, so ``parse(emit(x))`` reproduces every
scalar.
"""

from __future__ import annotations

import json

import numpy as np

from .operator_core import State, as_matrix


def matrix_to_obj(m: np.ndarray) -> dict:
    m = as_matrix(m)
    return {
        "rows": m.shape[0],
        "cols": m.shape[1],
        "data": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }


def matrix_from_obj(obj: dict) -> np.ndarray:
    try:
        rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if len(data) != rows or any(len(row) != cols for row in data):
        raise ValueError(f"matrix data does not match declared shape {rows}x{cols}")
    m = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(data):
        for j, (re, im) in enumerate(row):
            m[i, j] = complex(re, im)
    return as_matrix(m)


def state_to_obj(s: State) -> dict:
    if s.kind == "vector":
        data = [[float(z.real), float(z.imag)] for z in s.vector]
    else:
        data = matrix_to_obj(s.density)["data"]
    return {"kind": s.kind, "dim": s.dim, "data": data}


def state_from_obj(obj: dict, tol: float = 1e-8) -> State:
    try:
        kind, dim, data = obj["kind"], int(obj["dim"]), obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed state object: {exc}") from exc
    if kind == "vector":
        if len(data) != dim:
            raise ValueError(f"state vector has {len(data)} entries, declared dim {dim}")
        v = np.array([complex(re, im) for re, im in data])
        return State.from_vector(v, tol=tol)
    if kind == "density":
        rho = matrix_from_obj({"rows": dim, "cols": dim, "data": data})
        return State.from_density(rho, tol=tol)
    raise ValueError(f"unknown state kind {kind!r}")


def dump_matrix(m: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_obj(m), fh, allow_nan=False)


def load_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return matrix_from_obj(json.load(fh))


def dump_state(s: State, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(state_to_obj(s), fh, allow_nan=False)


def load_state(path, tol: float = 1e-8) -> State:
    with open(path, encoding="utf-8") as fh:
        return state_from_obj(json.load(fh), tol=tol)
