"""Assemble the four extremal solutions, each gated on its own hypotheses."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .afpi import AfpiReport, afpi_run
from .core import DareProblem, closed_loop, inner_min_eig, nres
from .duals import build_first_kind
from .errors import DareError
from .iterations import (IterationOptions, IterationReport, Termination,
                         fpi_dual2_run, fpi_run, newton_run, stein_initial)
from .linalg import cond2, is_psd, max_eig, min_eig, spectral_norm, spectrum
from .structure import StructureReport, analyze, default_stabilizing_feedback

log = logging.getLogger(__name__)

NAMES = ("x_pM", "x_pm", "x_mM", "x_mm")
SPECTRAL_TOL = 1e-8
SIGN_RTOL = 1e-10
ROUTE_A_COND = 1e12
ROUTE_AGREEMENT_WARN = 1e-6
METHODS = ("afpi", "fpi", "newton")


@dataclass
class SolutionDiagnostics:
    nres: float
    rho_t: float
    mu_t: float
    iterations: int
    route: str
    termination: str


@dataclass
class Verification:
    kind: str
    checks: dict[str, bool]
    values: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [k for k, ok in self.checks.items() if not ok]


@dataclass
class ExtremalSolutions:
    x_pM: np.ndarray | None = None
    x_pm: np.ndarray | None = None
    x_mM: np.ndarray | None = None
    x_mm: np.ndarray | None = None
    diagnostics: dict[str, SolutionDiagnostics] = field(default_factory=dict)
    skipped: dict[str, str] = field(default_factory=dict)
    failed: set[str] = field(default_factory=set)  # attempted but not delivered
    structure: StructureReport | None = None
    reports: dict[str, AfpiReport | IterationReport] = field(default_factory=dict)
    route_agreement: float | None = None
    wall_ms: float = 0.0

    def solutions(self) -> dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in NAMES if getattr(self, k) is not None}


def verify_solution(p: DareProblem, x, kind: str, tol: float = 1e-14) -> Verification:
    """Check residual, ``R + B^H X B > 0``, sign and spectral condition for
    a candidate extremal solution of the given kind."""
    x = np.asarray(x)
    checks, values = {}, {}
    try:
        values["nres"] = nres(p, x)
    except DareError:
        values["nres"] = float("inf")
    checks["nres"] = values["nres"] <= 10 * tol
    values["inner_min_eig"] = inner_min_eig(p, x)
    checks["inner_pd"] = values["inner_min_eig"] > 0
    scale = SIGN_RTOL * max(1.0, spectral_norm(x))
    if kind.startswith("x_p"):
        checks["sign"] = min_eig(x) >= -scale
    else:
        checks["sign"] = max_eig(x) <= scale
    try:
        s = spectrum(closed_loop(p, x).t)
        values["rho_t"], values["mu_t"] = s.rho, s.mu
    except DareError:
        values["rho_t"] = values["mu_t"] = float("nan")
    if kind == "x_pM":
        checks["spectral"] = values["rho_t"] <= 1 + SPECTRAL_TOL
    elif kind == "x_mm":
        checks["spectral"] = values["mu_t"] >= 1 - SPECTRAL_TOL
    return Verification(kind, checks, values)


def ordering_gap(sol: ExtremalSolutions) -> float:
    """Most negative relative eigenvalue along ``x_mm <= x_mM <= 0 <= x_pm <= x_pM``
    (0 when the chain holds exactly; only present solutions take part)."""
    chain = [sol.x_mm, sol.x_mM, "zero", sol.x_pm, sol.x_pM]
    mats = [c for c in chain if c is not None]
    n = next((m.shape[0] for m in mats if not isinstance(m, str)), 0)
    mats = [np.zeros((n, n)) if isinstance(m, str) else m for m in mats]
    worst = 0.0
    for lo, hi in zip(mats, mats[1:]):
        scale = max(1.0, spectral_norm(lo), spectral_norm(hi))
        worst = min(worst, min_eig(hi - lo) / scale)
    return worst


def _rel(x, y):
    return spectral_norm(x - y) / max(spectral_norm(y), 1e-300)


class _Assembler:
    def __init__(self, p, opts, out: ExtremalSolutions):
        self.p, self.opts, self.out = p, opts, out

    def skip(self, name, reason):
        self.out.skipped.setdefault(name, reason)

    def offer(self, name, x, route, iterations, termination):
        if x is None:
            self.out.failed.add(name)
            self.skip(name, f"{route}: no iterate produced ({termination})")
            return
        v = verify_solution(self.p, x, name, self.opts.tol)
        if not v.passed:
            self.out.failed.add(name)
            self.skip(name, f"{route}: {termination}; failed checks {', '.join(v.failed())} "
                            f"(nres={v.values['nres']:.3g})")
            return
        setattr(self.out, name, x)
        self.out.diagnostics[name] = SolutionDiagnostics(
            nres=v.values["nres"], rho_t=v.values["rho_t"], mu_t=v.values["mu_t"],
            iterations=iterations, route=route, termination=str(getattr(termination, "value", termination)))


def _pbh_reason(st: StructureReport, test: str) -> str:
    for w in st.witnesses:
        if w.test == test:
            lam = w.eigenvalue
            lam_s = f"{lam.real:.6g}" if abs(lam.imag) < 1e-12 else f"{lam:.6g}"
            return f"rank[A-lambda I, B] deficient at lambda={lam_s}"
    return f"{test} test failed"


def solve_all(p: DareProblem, r: int = 2, opts: IterationOptions | None = None,
              feedback=None, *, dual_feedback=None, c=None, method: str = "afpi",
              targets=("psd", "nsd")) -> ExtremalSolutions:
    """Compute every extremal solution whose hypotheses hold.

    Positive side (needs stabilizability): ``X_hat`` from the Stein
    initializer gives ``x_pM`` and ``H_k`` gives ``x_pm``.  Negative side:
    route B runs the same engine on the first-kind dual (``A`` nonsingular,
    antistabilizability, ``Hhat >= 0``), giving ``x_mM`` and ``x_mm``;
    route A takes ``x_mm = -G_inf^{-1}`` from the primal triple when
    ``(A, B)`` is controllable and ``A`` nonsingular.  Route B is canonical
    when both succeed.

    Each delivered solution passed :func:`verify_solution`; everything else
    is listed in ``skipped`` with the reason.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    opts = opts or IterationOptions()
    t0 = time.perf_counter()
    st = analyze(p, c)
    out = ExtremalSolutions(structure=st)
    asm = _Assembler(p, opts, out)
    route_a = None

    if "psd" in targets:
        route_a = _positive_side(p, r, opts, feedback, method, st, asm)
    else:
        for name in ("x_pM", "x_pm"):
            asm.skip(name, "not requested")
    if "nsd" in targets:
        if method == "newton":
            for name in ("x_mM", "x_mm"):
                asm.skip(name, "method newton computes x_pM only")
        else:
            if route_a is None and "psd" not in targets and method == "afpi":
                route_a = _route_a_only(p, r, opts, feedback, st, asm)
            _negative_side(p, r, opts, dual_feedback, method, st, asm, route_a)
    else:
        for name in ("x_mM", "x_mm"):
            asm.skip(name, "not requested")
    out.wall_ms = 1e3 * (time.perf_counter() - t0)
    return out


def _positive_side(p, r, opts, feedback, method, st, asm):
    out = asm.out
    if not st.stabilizable:
        reason = _pbh_reason(st, "stabilizable")
        for name in ("x_pM", "x_pm"):
            asm.skip(name, f"(A, B) not stabilizable: {reason}")
        return None
    try:
        f = default_stabilizing_feedback(p) if feedback is None else np.asarray(feedback)
        x0 = stein_initial(p, f)
    except DareError as exc:
        for name in ("x_pM", "x_pm"):
            out.failed.add(name)
            asm.skip(name, f"no stabilizing initializer: {exc}")
        return None
    route_a = None
    if method == "afpi":
        track = st.controllable and st.a_nonsingular
        try:
            rep = afpi_run(p, x0, r, opts, track_g=track)
        except DareError as exc:
            for name in ("x_pM", "x_pm"):
                out.failed.add(name)
                asm.skip(name, f"afpi breakdown: {exc}")
            return None
        out.reports["primal"] = rep
        asm.offer("x_pM", rep.xhat_limit, f"afpi({r})", rep.iterations_xhat, rep.termination_xhat)
        asm.offer("x_pm", rep.h_limit, f"afpi({r})", rep.iterations_h, rep.termination_h)
        if track:
            route_a = _route_a_from(rep)
    elif method == "fpi":
        for name, start in (("x_pM", x0), ("x_pm", np.zeros_like(x0))):
            try:
                rep = fpi_run(p, start, opts)
                out.reports[name] = rep
                asm.offer(name, rep.x, "fpi", rep.iterations, rep.termination)
            except DareError as exc:
                out.failed.add(name)
                asm.skip(name, f"fpi: {exc}")
    else:
        try:
            rep = newton_run(p, x0, opts)
            out.reports["x_pM"] = rep
            asm.offer("x_pM", rep.x, "newton", rep.iterations, rep.termination)
        except DareError as exc:
            out.failed.add("x_pM")
            asm.skip("x_pM", f"newton: {exc}")
        asm.skip("x_pm", "method newton computes x_pM only")
    return route_a


def _route_a_from(rep: AfpiReport):
    if rep.termination_g != Termination.CONVERGED or rep.g_limit is None:
        return f"G_k did not converge ({rep.termination_g.value if rep.termination_g else 'untracked'})"
    if cond2(rep.g_limit) > ROUTE_A_COND:
        return "G_inf too ill-conditioned to invert"
    return (-np.linalg.inv(rep.g_limit), rep.iterations_g)


def _route_a_only(p, r, opts, feedback, st, asm):
    if not (st.controllable and st.a_nonsingular):
        return None
    try:
        rep = afpi_run(p, np.zeros((p.n, p.n)), r, opts, track_g=True)
    except DareError as exc:
        return f"afpi breakdown: {exc}"
    asm.out.reports["primal"] = rep
    return _route_a_from(rep)


def _negative_side(p, r, opts, dual_feedback, method, st, asm, route_a):
    out = asm.out
    if method == "fpi" and st.controllable and st.a_nonsingular:
        try:
            rep = fpi_dual2_run(p, np.zeros((p.n, p.n)), opts)
            out.reports["dual2"] = rep
            route_a = (-np.linalg.inv(rep.x), rep.iterations) if rep.converged \
                else f"second-kind iteration {rep.termination.value}"
        except DareError as exc:
            route_a = f"second-kind iteration: {exc}"

    route_b = None
    reason = None
    if not st.a_nonsingular:
        reason = "A is singular"
    elif not st.antistab_rank_ok:
        reason = _pbh_reason(st, "antistabilizable")
    if reason is None:
        try:
            dual = build_first_kind(p)
        except DareError as exc:
            dual, reason = None, f"dual construction failed: {exc}"
        if dual is not None and not is_psd(dual.problem.h, 1e-12 * max(1.0, spectral_norm(dual.problem.h))):
            reason = "dual H is not positive semidefinite"
    if reason is not None:
        asm.skip("x_mM", reason)
    else:
        route_b = _run_dual(p, dual, r, opts, dual_feedback, method, asm)

    a_ok = isinstance(route_a, tuple)
    b_ok = route_b is not None
    if a_ok and b_ok:
        out.route_agreement = _rel(route_a[0], route_b[0])
        if out.route_agreement > ROUTE_AGREEMENT_WARN:
            log.warning("x_mm routes disagree: relative gap %.3g; using the first-kind dual",
                        out.route_agreement)
    if b_ok:
        asm.offer("x_mm", *route_b)
    elif a_ok:
        asm.offer("x_mm", route_a[0], "second-kind dual", route_a[1], Termination.CONVERGED)
    else:
        parts = [reason] if reason else []
        if isinstance(route_a, str):
            parts.append(f"route A: {route_a}")
        elif route_a is None:
            parts.append("route A needs (A, B) controllable and A nonsingular")
        if "x_mm" not in out.skipped:
            asm.skip("x_mm", "; ".join(parts) or "no route available")


def _run_dual(p, dual, r, opts, dual_feedback, method, asm):
    out = asm.out
    dp = dual.problem
    try:
        fd = default_stabilizing_feedback(dp) if dual_feedback is None else np.asarray(dual_feedback)
        y0 = stein_initial(dp, fd)
    except DareError as exc:
        for name in ("x_mM", "x_mm"):
            out.failed.add(name)
            asm.skip(name, f"no stabilizing initializer for the dual: {exc}")
        return None
    if method == "afpi":
        try:
            rep = afpi_run(dp, y0, r, opts, target=p, sign=-1.0)
        except DareError as exc:
            for name in ("x_mM", "x_mm"):
                out.failed.add(name)
                asm.skip(name, f"dual afpi breakdown: {exc}")
            return None
        out.reports["dual"] = rep
        route = f"first-kind dual afpi({r})"
        asm.offer("x_mM", None if rep.h_limit is None else -rep.h_limit, route,
                  rep.iterations_h, rep.termination_h)
        if rep.xhat_limit is None:
            return None
        return (-rep.xhat_limit, route, rep.iterations_xhat, rep.termination_xhat)
    result = None
    for name, start in (("x_mM", np.zeros_like(y0)), ("x_mm", y0)):
        try:
            rep = fpi_run(dp, start, opts)
        except DareError as exc:
            if name == "x_mM":
                out.failed.add(name)
                asm.skip(name, f"dual fpi: {exc}")
            continue
        out.reports[f"dual_{name}"] = rep
        if name == "x_mM":
            asm.offer(name, -rep.x, "first-kind dual fpi", rep.iterations, rep.termination)
        else:
            result = (-rep.x, "first-kind dual fpi", rep.iterations, rep.termination)
    return result
