"""JSON problem files, CSV convergence histories and JSON summaries."""
from __future__ import annotations

import csv
import io
import json
import math
from typing import IO

import numpy as np

from .afpi import AfpiReport
from .core import DareProblem
from .errors import DareError, ParseError, ValidationError
from .iterations import IterationReport

HISTORY_HEADER = ["k", "nres_xhat", "nres_h", "rho_t_xhat", "rho_t_h", "mu_t_xhat", "norm_Ak"]


def _entry(v, path):
    if isinstance(v, bool):
        raise ValidationError("booleans are not numbers", path)
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
        return complex(v[0], v[1])
    raise ValidationError(f"expected a number or [re, im], got {v!r}", path)


def _nested(value, cols) -> bool:
    return all(isinstance(r, list) and len(r) == cols for r in value)


def decode_matrix(value, shape, path) -> np.ndarray:
    """Decode a row-major matrix given as nested rows or a flat list.

    A bare number is accepted for a 1x1 matrix.
    """
    rows, cols = shape
    if not isinstance(value, list):
        if rows * cols != 1:
            raise ValidationError(f"expected a {rows}x{cols} matrix", path)
        value = [[value]]
    if len(value) == rows and _nested(value, cols):
        out = np.array([[_entry(v, f"{path}[{i}][{j}]") for j, v in enumerate(r)]
                        for i, r in enumerate(value)], dtype=complex)
    elif len(value) == rows * cols:
        out = np.array([_entry(v, f"{path}[{i}]") for i, v in enumerate(value)],
                       dtype=complex).reshape(rows, cols)
    else:
        raise ValidationError(f"expected a {rows}x{cols} matrix", path)
    if not np.all(np.isfinite(out)):
        raise ValidationError("non-finite entry", path)
    return out if np.any(out.imag) else out.real.copy()


def encode_matrix(m) -> list:
    m = np.asarray(m)
    if np.iscomplexobj(m) and np.any(m.imag):
        return [[[float(v.real), float(v.imag)] for v in row] for row in m]
    return [[float(v) for v in row] for row in np.real(m)]


def load_problem(text: str) -> tuple[DareProblem, np.ndarray | None]:
    """Parse a problem file; returns the problem and ``C`` when given."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    for key in ("n", "m", "A", "B", "R"):
        if key not in doc:
            raise ValidationError("missing member", key)
    n, m = doc["n"], doc["m"]
    for key, v in (("n", n), ("m", m)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ValidationError("must be a positive integer", key)
    if ("H" in doc) == ("C" in doc):
        raise ValidationError("exactly one of H|C must be given", "H|C")
    a = decode_matrix(doc["A"], (n, n), "A")
    b = decode_matrix(doc["B"], (n, m), "B")
    r = decode_matrix(doc["R"], (m, m), "R")
    h = c = None
    if "H" in doc:
        h = decode_matrix(doc["H"], (n, n), "H")
    else:
        cv = doc["C"]
        if isinstance(cv, list) and cv and _nested(cv, n):
            p_rows = len(cv)
        elif isinstance(cv, list) and cv and len(cv) % n == 0:
            p_rows = len(cv) // n
        else:
            raise ValidationError(f"expected a p x {n} matrix", "C")
        c = decode_matrix(cv, (p_rows, n), "C")
    for name, mat in (("R", r), ("H", h)):
        if mat is not None and not np.allclose(mat, mat.conj().T, rtol=1e-12, atol=1e-14):
            raise ValidationError("must be Hermitian", name)
    if np.linalg.eigvalsh(0.5 * (r + r.conj().T))[0] <= 0:
        raise ValidationError("must be positive definite", "R")
    try:
        p = DareProblem.from_matrices(a, b, r, h=h, c=c, name=str(doc.get("name", "")))
    except (DareError, ValueError) as exc:
        raise ValidationError(str(exc), "H" if h is not None else "C") from exc
    return p, c


def parse_problem(text: str) -> DareProblem:
    """Problem file text to a validated :class:`DareProblem`."""
    return load_problem(text)[0]


def dump_problem(p: DareProblem, c=None) -> str:
    doc = {"name": p.name, "n": p.n, "m": p.m, "A": encode_matrix(p.a),
           "B": encode_matrix(p.b), "R": encode_matrix(p.r)}
    if c is not None:
        doc["C"] = encode_matrix(c)
    else:
        doc["H"] = encode_matrix(p.h)
    return json.dumps(doc, indent=1)


def load_feedback(text: str) -> tuple[np.ndarray | None, np.ndarray | None]:
    """Feedback file: ``{"F": matrix, "F_dual": matrix}``, both optional."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    out = []
    for key in ("F", "F_dual"):
        v = doc.get(key)
        if v is None:
            out.append(None)
            continue
        if not isinstance(v, list) or not v or not isinstance(v[0], list):
            raise ValidationError("expected nested rows", key)
        out.append(decode_matrix(v, (len(v), len(v[0])), key))
    return out[0], out[1]


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return f"{v:.5e}"


def history_rows(report) -> list[list[str]]:
    """Rows of the history table (without header) for an AFPI or plain report."""
    rows = []
    if isinstance(report, AfpiReport):
        for s in report.steps:
            rows.append([str(s.k), _fmt(s.nres_xhat), _fmt(s.nres_h), _fmt(s.rho_t_xhat),
                         _fmt(s.rho_t_h), _fmt(s.mu_t_xhat), _fmt(s.norm_a)])
    elif isinstance(report, IterationReport):
        for k in range(1, len(report.nres_history)):
            rows.append([str(k), _fmt(report.nres_history[k]), "",
                         _fmt(report.rho_t_history[k]), "", "", ""])
    else:
        raise TypeError(f"unsupported report {type(report).__name__}")
    return rows


def write_history_csv(report, out: IO[str] | str) -> None:
    if isinstance(out, str):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_history_csv(report, fh)
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(HISTORY_HEADER)
    w.writerows(history_rows(report))


def history_csv(report) -> str:
    buf = io.StringIO()
    write_history_csv(report, buf)
    return buf.getvalue()


def _num(v):
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return None
    return float(v)


def summary_dict(sol) -> dict:
    """JSON-ready summary of an :class:`ExtremalSolutions`."""
    sols = {}
    for name, x in sol.solutions().items():
        d = sol.diagnostics[name]
        sols[name] = {"matrix": encode_matrix(x), "nres": _num(d.nres),
                      "rho_t": _num(d.rho_t), "mu_t": _num(d.mu_t)}
    iterations = {name: {"count": d.iterations, "route": d.route, "termination": d.termination}
                  for name, d in sol.diagnostics.items()}
    return {
        "solutions": sols,
        "skipped": dict(sol.skipped),
        "structure": sol.structure.as_dict() if sol.structure else None,
        "iterations": iterations,
        "wall_ms": round(sol.wall_ms, 3),
    }
