"""JSON readers and writers for matrices, models, operator sets and drives.

Matrix JSON: ``{"n": n, "data": [[[re, im], ...], ...]}``, row-major.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .intertwine import IntertwinerSet, Relation
from .linalg import OperatorBasis, as_cmatrix
from .spectral import DegeneracyReport, Equivalence, SymmetryDescriptor

__all__ = [
    "matrix_from_json",
    "matrix_to_json",
    "read_json",
    "read_matrix",
    "read_model",
    "read_segments",
    "read_state",
    "report_to_json",
    "etas_from_json",
    "etas_set_from_json",
    "etas_to_json",
    "symmetry_from_json",
    "symmetry_to_json",
    "write_json",
]


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {"n": int(m.shape[0]), "data": [[_pair(z) for z in row] for row in m]}


def _complex_entry(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2:
        return complex(float(x[0]), float(x[1]))
    raise ValueError(f"matrix entry must be [re, im], got {x!r}")


def matrix_from_json(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "data" not in obj:
        raise ValueError("matrix JSON needs a 'data' field")
    rows = obj["data"]
    m = np.array([[_complex_entry(x) for x in row] for row in rows], dtype=np.complex128)
    n = obj.get("n", len(rows))
    if m.ndim != 2 or m.shape != (n, n):
        raise ValueError(f"matrix data does not match n={n}")
    return as_cmatrix(m)


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def read_matrix(path) -> np.ndarray:
    return matrix_from_json(read_json(path))


def symmetry_to_json(sym: SymmetryDescriptor) -> dict:
    out = {"kind": sym.kind, "phi": sym.phi}
    out["linear_part"] = None if sym.linear_part is None else matrix_to_json(sym.linear_part)
    if sym.equivalence is not None:
        out["equivalence"] = {
            "unitary": matrix_to_json(sym.equivalence.unitary),
            "linear_part": matrix_to_json(sym.equivalence.linear_part),
        }
    return out


def symmetry_from_json(obj) -> SymmetryDescriptor:
    lp = obj.get("linear_part")
    eq = obj.get("equivalence")
    return SymmetryDescriptor(
        obj["kind"],
        obj.get("phi"),
        None if lp is None else matrix_from_json(lp),
        None if eq is None else Equivalence(matrix_from_json(eq["unitary"]), matrix_from_json(eq["linear_part"])),
    )


def read_model(path) -> tuple[np.ndarray, np.ndarray | None, list[SymmetryDescriptor]]:
    """Matrix plus optional ``seed`` and ``symmetry`` metadata (plain matrix files are accepted)."""
    obj = read_json(path)
    h = matrix_from_json(obj)
    seed = obj.get("seed")
    syms = [symmetry_from_json(s) for s in obj.get("symmetry", [])]
    return h, None if seed is None else matrix_from_json(seed), syms


def etas_to_json(s: IntertwinerSet) -> dict:
    return {
        "relation": None if s.relation is None else s.relation.to_json(),
        "construction": s.construction,
        "count": len(s),
        "etas": [{"matrix": matrix_to_json(e), "residual": float(r)} for e, r in zip(s.etas, s.residuals)],
    }


def etas_from_json(obj) -> list[np.ndarray]:
    """Operator matrices from an operator-set file (or a bare list of matrices)."""
    items = obj["etas"] if isinstance(obj, dict) else obj
    return [matrix_from_json(e["matrix"] if "matrix" in e else e) for e in items]


def etas_set_from_json(obj) -> IntertwinerSet:
    rel = obj.get("relation")
    mats = etas_from_json(obj)
    return IntertwinerSet(
        None if rel is None else Relation.from_json(rel),
        OperatorBasis(tuple(mats)),
        np.array([e.get("residual", 0.0) for e in obj["etas"]]),
        obj.get("construction", "nullspace"),
    )


def report_to_json(report: DegeneracyReport) -> list[dict]:
    out = []
    for c in report.clusters:
        out.append({
            "value": _pair(c.value),
            "algebraic": c.algebraic,
            "geometric": c.geometric,
            "kind": c.kind,
            "k_d": c.k_d,
            "order": c.order,
            "jordan_sizes": list(c.jordan_sizes),
        })
    return out


def read_segments(path) -> list[tuple[np.ndarray, float]]:
    obj = read_json(path)
    segs = obj.get("segments") if isinstance(obj, dict) else obj
    if not segs:
        raise ValueError("segment list is empty")
    return [(matrix_from_json(s["matrix"]), float(s["duration"])) for s in segs]


def read_state(spec: str) -> np.ndarray:
    """A state from a JSON file (``[[re, im], ...]`` or ``{"data": ...}``) or inline ``"1,0,1j"``."""
    p = Path(spec)
    if p.suffix == ".json" or p.exists():
        obj = read_json(p)
        data = obj["data"] if isinstance(obj, dict) else obj
        return np.array([_complex_entry(x) for x in data], dtype=np.complex128)
    try:
        return np.array([complex(tok.strip().replace(" ", "")) for tok in spec.split(",")], dtype=np.complex128)
    except ValueError as exc:
        raise ValueError(f"cannot parse state {spec!r}") from exc
