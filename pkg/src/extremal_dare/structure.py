"""Stabilizability, detectability and related rank tests, plus a default
stabilizing feedback."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import DareProblem, closed_loop
from .errors import FeedbackSearchFailed, IterationError, NotStabilizable
from .linalg import cond2, eigenvalues, matrix_rank, spectral_norm, spectrum

log = logging.getLogger(__name__)

DSTABLE_MARGIN = 1e-10
UNIT_TOL = 1e-10
# relative singular value cutoff for the PBH and Krylov rank tests
RANK_RTOL = 1e-10
A_COND_LIMIT = 1e14


@dataclass(frozen=True)
class Witness:
    test: str
    eigenvalue: complex
    rank_defect: int


@dataclass(frozen=True)
class StructureReport:
    stabilizable: bool
    detectable: bool | None  # None when no output matrix C was supplied
    controllable: bool
    antistab_rank_ok: bool
    a_nonsingular: bool
    witnesses: list[Witness] = field(default_factory=list)
    controllable_krylov: bool = True
    controllable_pbh: bool = True

    def as_dict(self) -> dict:
        return {
            "stabilizable": self.stabilizable,
            "detectable": self.detectable,
            "controllable": self.controllable,
            "antistab_rank_ok": self.antistab_rank_ok,
            "a_nonsingular": self.a_nonsingular,
            "witnesses": [
                {"test": w.test, "eigenvalue": [w.eigenvalue.real, w.eigenvalue.imag],
                 "rank_defect": w.rank_defect} for w in self.witnesses],
        }


def _distinct(lam, tol=1e-8):
    out = []
    for v in lam:
        if all(abs(v - u) > tol * max(1.0, abs(u)) for u in out):
            out.append(complex(v))
    return out


def pbh_defect(a, b, lam) -> int:
    """``n - rank [A - lam I, B]``."""
    n = a.shape[0]
    return n - matrix_rank(np.hstack([a - lam * np.eye(n), b]), RANK_RTOL)


def krylov_rank(a, b) -> int:
    n = a.shape[0]
    blocks, cur = [b], b
    for _ in range(n - 1):
        cur = a @ cur
        blocks.append(cur)
    k = np.hstack(blocks)
    # columns of A^j B can differ wildly in scale; normalize them
    norms = np.linalg.norm(k, axis=0)
    k = k[:, norms > 0] / norms[norms > 0]
    return matrix_rank(k, RANK_RTOL) if k.size else 0


def analyze(p: DareProblem, c=None) -> StructureReport:
    """Run the rank tests that gate each extremal solution.

    Stabilizability and antistabilizability use the PBH test at every
    distinct eigenvalue of ``A`` in the relevant region; controllability
    needs both the Krylov rank and PBH at all eigenvalues.  Detectability
    is tested on ``(A, C)`` when ``C`` is given.
    """
    a, b = p.a, p.b
    lam = _distinct(eigenvalues(a))
    witnesses = []
    stab = pbh_all = antistab = True
    for v in lam:
        d = pbh_defect(a, b, v)
        if d == 0:
            continue
        pbh_all = False
        tests = []
        if abs(v) >= 1 - UNIT_TOL:
            stab = False
            tests.append("stabilizable")
        # the antistabilizability test ignores the zero eigenvalue
        if abs(v) > 1e-12 * max(1.0, spectral_norm(a)) and abs(v) <= 1 + UNIT_TOL:
            antistab = False
            tests.append("antistabilizable")
        for t in tests or ["controllable"]:
            witnesses.append(Witness(t, v, d))
    kry = krylov_rank(a, b) == p.n
    if kry != pbh_all:
        log.warning("Krylov and PBH controllability tests disagree")
    detect = None
    if c is not None:
        c = np.asarray(c)
        detect = True
        for v in lam:
            if abs(v) < 1 - UNIT_TOL:
                continue
            d = pbh_defect(a.conj().T, c.conj().T, np.conj(v))
            if d:
                detect = False
                witnesses.append(Witness("detectable", v, d))
    return StructureReport(
        stabilizable=stab,
        detectable=detect,
        controllable=kry and pbh_all,
        antistab_rank_ok=antistab,
        a_nonsingular=cond2(a) < A_COND_LIMIT,
        witnesses=witnesses,
        controllable_krylov=kry,
        controllable_pbh=pbh_all,
    )


def is_dstable(m, margin: float = DSTABLE_MARGIN) -> bool:
    return spectrum(m).rho < 1 - margin


def default_stabilizing_feedback(p: DareProblem) -> np.ndarray:
    """A feedback ``F`` with ``A - B F`` d-stable.

    Returns 0 when ``A`` is already d-stable.  Otherwise solves a slightly
    regularized equation (``H + delta I``) by the accelerated iteration
    from zero and returns the feedback of its maximal solution.
    """
    if is_dstable(p.a):
        return np.zeros((p.m, p.n), dtype=np.result_type(p.a, p.b))
    if not analyze(p).stabilizable:
        raise NotStabilizable("(A, B) is not stabilizable")
    from .afpi import afpi_run
    from .iterations import IterationOptions

    delta = max(1e-8, 1e-8 * spectral_norm(p.h))
    reg = DareProblem.from_matrices(p.a, p.b, p.r, p.h + delta * np.eye(p.n),
                                    check_h=False)
    # NRes may rise while the weakly observed unstable modes build up
    opts = IterationOptions(tol=1e-13, max_iter=200, detect_stagnation=False)
    try:
        rep = afpi_run(reg, np.zeros((p.n, p.n)), 2, opts)
        x = rep.h_limit
        f = closed_loop(p, x).f
    except (IterationError, ArithmeticError) as exc:
        raise FeedbackSearchFailed(str(exc)) from exc
    if not is_dstable(p.a - p.b @ f):
        raise FeedbackSearchFailed(
            f"rho(A - B F) = {spectrum(p.a - p.b @ f).rho:.6g} after search")
    return f
