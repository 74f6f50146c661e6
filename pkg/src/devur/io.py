"""JSON and CSV formats shared by the command line.

Complex scalars are ``[re, im]``; matrices are
``{"rows": n, "cols": m, "data": [[re, im], ...]}`` in row-major order;
states are ``{"kind": "pure", "amplitudes": [...]}`` or
``{"kind": "mixed", "matrix": {...}}``.  Floats are written with Python's
shortest round-trip representation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidState
from .numkit import Observable, State


def complex_to_json(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def complex_from_json(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise InvalidState(f"complex scalar must be [re, im], got {v!r}")
    return complex(float(v[0]), float(v[1]))


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    rows, cols = m.shape
    return {"rows": rows, "cols": cols, "data": [complex_to_json(z) for z in m.reshape(-1)]}


def matrix_from_json(d: dict) -> np.ndarray:
    try:
        rows, cols, data = int(d["rows"]), int(d["cols"]), d["data"]
    except (KeyError, TypeError) as exc:
        raise InvalidState(f"matrix JSON needs rows, cols and data: {exc}") from exc
    if len(data) != rows * cols:
        raise DimensionMismatch(f"matrix data has {len(data)} entries, expected {rows * cols}")
    return np.array([complex_from_json(v) for v in data], dtype=complex).reshape(rows, cols)


def vector_to_json(v) -> list[list[float]]:
    return [complex_to_json(z) for z in np.asarray(v, dtype=complex)]


def vector_from_json(v) -> np.ndarray:
    return np.array([complex_from_json(z) for z in v], dtype=complex)


def state_to_json(state: State) -> dict:
    if state.is_pure:
        return {"kind": "pure", "amplitudes": vector_to_json(state.vector)}
    return {"kind": "mixed", "matrix": matrix_to_json(state.density)}


def state_from_json(d: dict) -> State:
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "pure":
        return State.pure(vector_from_json(d["amplitudes"]))
    if kind == "mixed":
        return State.mixed(matrix_from_json(d["matrix"]))
    raise InvalidState(f"state kind must be 'pure' or 'mixed', got {kind!r}")


def observable_from_json(d: dict) -> Observable:
    """Accept a bare matrix object or ``{"matrix": {...}, "label": ...}``."""
    if "matrix" in d:
        return Observable(matrix_from_json(d["matrix"]), label=str(d.get("label", "")))
    return Observable(matrix_from_json(d))


def observable_to_json(obs: Observable) -> dict:
    out = {"matrix": matrix_to_json(obs.matrix)}
    if obs.label:
        out["label"] = obs.label
    return out


def load_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _clean(obj):
    """Convert numpy scalars/arrays so ``json`` can serialise them; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, complex):
        return complex_to_json(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def format_float(x) -> str:
    if x is None:
        return ""
    f = float(x)
    return repr(f) if math.isfinite(f) else ""


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[list[float | None]]]:
    r = csv.reader(io.StringIO(text))
    header = next(r)
    rows = [[float(v) if v != "" else None for v in row] for row in r]
    return header, rows
