"""Plain fixed-point iterations, the Newton baseline, Stein initial guesses
and convergence-rate estimates."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import DareProblem, closed_loop, nres, riccati_apply
from .errors import (Breakdown, InsufficientHistory, MonotonicityViolated,
                     NotDStable, SingularInnerMatrix, SingularPencil,
                     SingularSteinOperator, SteinBreakdown)
from .linalg import (is_psd, max_eig, min_eig, solve_stein, spectral_norm,
                     spectrum, sym)

MONOTONE_RTOL = 1e-10
STAGNATION_WINDOW = 5
STAGNATION_FACTOR = 0.99


class Termination(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    STAGNATED = "Stagnated"
    BREAKDOWN = "Breakdown"
    MONOTONICITY_VIOLATED = "MonotonicityViolated"


@dataclass(frozen=True)
class IterationOptions:
    tol: float = 1e-14
    max_iter: int = 200
    monotonicity_check: bool = True
    record_history: bool = False
    detect_stagnation: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class IterationReport:
    x: np.ndarray
    nres_history: list[float] = field(default_factory=list)
    rho_t_history: list[float] = field(default_factory=list)
    step_history: list[float] = field(default_factory=list)  # ||X_{k+1} - X_k||
    iterations: int = 0
    termination: Termination = Termination.MAX_ITER
    rate_estimate: float | None = None
    history: list[np.ndarray] | None = None

    @property
    def converged(self) -> bool:
        return self.termination == Termination.CONVERGED


def _rho_t(p, x):
    try:
        return spectrum(closed_loop(p, x).t).rho
    except (SingularInnerMatrix, np.linalg.LinAlgError):
        return float("nan")


def _stagnating(hist):
    if len(hist) <= STAGNATION_WINDOW:
        return False
    return hist[-1] > STAGNATION_FACTOR * hist[-1 - STAGNATION_WINDOW]


def _finish(rep: IterationReport, term: Termination) -> IterationReport:
    rep.termination = term
    pos = [s for s in rep.step_history if s > 0]
    if len(pos) >= 4:
        rep.rate_estimate = rate_estimate(pos)
    return rep


def _fixed_point(p: DareProblem, x0, opts: IterationOptions,
                 on_iterate: Callable | None = None) -> IterationReport:
    x = sym(np.asarray(x0))
    rep = IterationReport(x=x, history=[x] if opts.record_history else None)
    direction = None
    if opts.monotonicity_check:
        scale = 1e-12 * max(1.0, spectral_norm(p.h))
        if is_psd(x, scale) and is_psd(p.h - x, scale):
            direction = 1
    k = 0
    while True:
        rep.nres_history.append(nres(p, x))
        rep.rho_t_history.append(_rho_t(p, x))
        if rep.nres_history[-1] <= opts.tol:
            return _finish(rep, Termination.CONVERGED)
        if k >= opts.max_iter:
            return _finish(rep, Termination.MAX_ITER)
        if opts.detect_stagnation and _stagnating(rep.nres_history):
            return _finish(rep, Termination.STAGNATED)
        try:
            x_new = riccati_apply(p, x)
        except SingularPencil as exc:
            raise Breakdown(f"I + G X singular at k={k}", _finish(rep, Termination.BREAKDOWN)) from exc
        if not np.all(np.isfinite(x_new)):
            raise Breakdown(f"non-finite iterate at k={k + 1}", _finish(rep, Termination.BREAKDOWN))
        d = x_new - x
        if opts.monotonicity_check:
            tol = MONOTONE_RTOL * max(1.0, spectral_norm(x_new))
            if direction is None and k == 0:
                if min_eig(d) >= -tol:
                    direction = 1
                elif max_eig(d) <= tol:
                    direction = -1
            if direction is not None and min_eig(direction * d) < -tol:
                rep.x = x_new
                raise MonotonicityViolated(
                    f"{'increase' if direction > 0 else 'decrease'} violated at k={k + 1}",
                    _finish(rep, Termination.MONOTONICITY_VIOLATED))
        rep.step_history.append(spectral_norm(d))
        x = x_new
        k += 1
        rep.x, rep.iterations = x, k
        if rep.history is not None:
            rep.history.append(x)
        if on_iterate is not None:
            on_iterate(k, x)


def fpi_run(p: DareProblem, x0, opts: IterationOptions | None = None) -> IterationReport:
    """Plain fixed-point iteration ``X_{k+1} = R(X_k)``.

    With the monotonicity check on, a start with ``0 <= X_0 <= H`` must give
    a nondecreasing sequence; otherwise the direction of the first step, if
    definite, must persist.  A violation raises ``MonotonicityViolated``.
    """
    return _fixed_point(p, x0, opts or IterationOptions())


def stein_initial(p: DareProblem, f) -> np.ndarray:
    """PSD solution of ``X - A_F^H X A_F = H + F^H R F``, ``A_F = A - B F``."""
    f = np.asarray(f)
    a_f = p.a - p.b @ f
    if spectrum(a_f).rho >= 1.0:
        raise NotDStable(f"rho(A - B F) = {spectrum(a_f).rho:.6g} >= 1")
    x = solve_stein(a_f, p.h + f.conj().T @ p.r @ f)
    if not is_psd(x, 1e-10 * max(1.0, spectral_norm(x))):
        raise NotDStable("Stein solution is not positive semidefinite")
    return x


def newton_run(p: DareProblem, x0=None, opts: IterationOptions | None = None) -> IterationReport:
    """Newton (Kleinman-Hewer) iteration: ``S_{T_k}(X_{k+1}) = H + F_k^H R F_k``.

    Starts from ``stein_initial(p, default_stabilizing_feedback(p))`` when
    ``x0`` is None.  Raises ``SteinBreakdown`` when a closed loop is not
    d-stable or its Stein operator is singular.
    """
    opts = opts or IterationOptions()
    if x0 is None:
        from .structure import default_stabilizing_feedback
        x0 = stein_initial(p, default_stabilizing_feedback(p))
    x = sym(np.asarray(x0))
    rep = IterationReport(x=x, history=[x] if opts.record_history else None)
    k = 0
    while True:
        rep.nres_history.append(nres(p, x))
        try:
            cl = closed_loop(p, x)
        except SingularInnerMatrix as exc:
            raise SteinBreakdown(str(exc), _finish(rep, Termination.BREAKDOWN)) from exc
        rho = spectrum(cl.t).rho
        rep.rho_t_history.append(rho)
        if rep.nres_history[-1] <= opts.tol:
            return _finish(rep, Termination.CONVERGED)
        if k >= opts.max_iter:
            return _finish(rep, Termination.MAX_ITER)
        if opts.detect_stagnation and _stagnating(rep.nres_history):
            return _finish(rep, Termination.STAGNATED)
        if not rho < 1.0:
            raise SteinBreakdown(f"closed loop not d-stable at k={k} (rho={rho:.17g})",
                                 _finish(rep, Termination.BREAKDOWN))
        try:
            x_new = solve_stein(cl.t, p.h + cl.f.conj().T @ p.r @ cl.f)
        except SingularSteinOperator as exc:
            raise SteinBreakdown(f"Stein operator singular at k={k}",
                                 _finish(rep, Termination.BREAKDOWN)) from exc
        rep.step_history.append(spectral_norm(x_new - x))
        x = x_new
        k += 1
        rep.x, rep.iterations = x, k
        if rep.history is not None:
            rep.history.append(x)


def fpi_dual2_run(p: DareProblem, z0, opts: IterationOptions | None = None) -> IterationReport:
    """Fixed-point iteration of ``D2(Z) = G + A Z (I + H Z)^{-1} A^H``.

    For controllable ``(A, B)`` and ``Z_0 = 0``, ``Z_n`` must be positive
    definite; ``Breakdown`` is raised otherwise.
    """
    from .duals import build_second_kind
    from .structure import analyze

    opts = opts or IterationOptions()
    d2 = build_second_kind(p).problem
    check = analyze(p).controllable and not np.any(np.asarray(z0))
    seen = {}

    def watch(k, z):
        if check and k == p.n:
            seen["min"] = min_eig(z)

    rep = _fixed_point(d2, z0, replace(opts, monotonicity_check=False), watch)
    if "min" in seen and not seen["min"] > 0:
        raise Breakdown(f"Z_n not positive definite (min eig {seen['min']:.3g})", rep)
    return rep


def rate_estimate(history, mode: str = "r_linear", r: int | None = None) -> float:
    """Estimate the convergence factor ``sigma`` from an error history.

    ``r_linear``: geometric mean of successive ratios over the last half.
    ``r_superlinear``: mean of ``err_k^(1/r^k)`` over the last 3 points,
    with ``k`` the position in ``history``.

    >>> rate_estimate([1, 1/4, 1/16, 1/64])
    0.25
    """
    h = np.asarray(history, dtype=float)
    if h.size < 4 or np.any(h <= 0):
        raise InsufficientHistory("need at least 4 positive entries")
    if mode == "r_linear":
        tail = h[len(h) // 2 - 1:] if len(h) >= 4 else h
        ratios = tail[1:] / tail[:-1]
        return float(np.exp(np.mean(np.log(ratios))))
    if mode == "r_superlinear":
        if not r or r < 2:
            raise ValueError("r_superlinear needs r >= 2")
        k = np.arange(h.size)[-3:]
        with np.errstate(over="ignore"):
            vals = np.exp(np.log(h[-3:]) / np.power(float(r), k))
        return float(np.mean(vals))
    raise ValueError(f"unknown mode {mode!r}")
