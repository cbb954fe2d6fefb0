"""Acceptance criteria for the solver, runnable from the CLI and pytest.

Each criterion returns a :class:`CriterionResult`; ``run_suite`` prints one
PASS/FAIL line per criterion.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .afpi import afpi_run, verify_flow, verify_semigroup
from .builtin import builtin_example
from .core import identity_residuals, inner_min_eig, nres
from .driver import ordering_gap, solve_all
from .duals import verify_duality
from .errors import MonotonicityViolated, SteinBreakdown
from .iterations import IterationOptions, fpi_run, newton_run, stein_initial
from .linalg import spectral_norm
from .sampling import random_hermitian, random_problem, random_well_conditioned, rng_from_env
from .structure import default_stabilizing_feedback


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d}. {self.title}: {self.detail} ({self.seconds:.2f}s)"


def _rel(x, y):
    return spectral_norm(x - y) / spectral_norm(y)


def _opts(ex, **kw):
    return IterationOptions(tol=ex.tol, **kw)


def criterion_1() -> tuple[bool, str]:
    ex = builtin_example("ex1")
    t0 = time.perf_counter()
    sol = solve_all(ex.problem, 2, _opts(ex), ex.feedback, c=ex.c)
    dt = time.perf_counter() - t0
    rep = sol.reports["primal"]
    e_x = _rel(sol.x_pM, ex.expected["x_pM"])
    e_h = _rel(sol.x_pm, ex.expected["x_pm"])
    hit = [s.k for s in rep.steps if s.nres_xhat is not None and s.nres_xhat <= 1e-15]
    ok = e_x <= 1e-12 and e_h <= 1e-12 and bool(hit) and hit[0] <= 6 and dt < 0.1
    return ok, (f"rel err X_hat {e_x:.2g}, H {e_h:.2g}; NRes<=1e-15 at k={hit[0] if hit else None}; "
                f"{dt * 1e3:.1f} ms")


def criterion_2() -> tuple[bool, str]:
    ex = builtin_example("ex1")
    rep = afpi_run(ex.problem, stein_initial(ex.problem, ex.feedback), 2, _opts(ex))
    dx = max(abs(s.rho_t_xhat - 0.5) for s in rep.steps if s.rho_t_xhat is not None)
    dh = max(abs(s.rho_t_h - 3.0) for s in rep.steps if s.rho_t_h is not None)
    return dx <= 1e-10 and dh <= 1e-8, (f"max |rho(T_Xhat)-0.5| {dx:.2g}, "
                                        f"max |rho(T_H)-3| {dh:.2g} over {len(rep.steps)} steps")


def criterion_3() -> tuple[bool, str]:
    ex = builtin_example("ex2")
    t0 = time.perf_counter()
    rep = afpi_run(ex.problem, stein_initial(ex.problem, ex.feedback), 2, _opts(ex))
    dt = time.perf_counter() - t0
    e_h = _rel(rep.h_limit, ex.expected["x_pm"])
    hit = [s.k for s in rep.steps if s.nres_xhat is not None and s.nres_xhat <= 1e-14]
    ok = e_h <= 1e-10 and bool(hit) and hit[0] <= 5 and dt < 0.5
    return ok, (f"H rel err {e_h:.2g} ((5,5)={rep.h_limit[4, 4]:.15f}); "
                f"NRes<=1e-14 at k={hit[0] if hit else None}; {dt * 1e3:.1f} ms")


def criterion_4() -> tuple[bool, str]:
    ex = builtin_example("ex3", eps=0.0)
    x0 = stein_initial(ex.problem, ex.feedback)
    ref = {2: 50, 4: 25, 8: 17, 100: 8}
    counts, ok = {}, True
    t0 = time.perf_counter()
    for r in ref:
        rep = afpi_run(ex.problem, x0, r, _opts(ex))
        counts[r] = rep.iterations_xhat
        ok &= rep.converged and spectral_norm(rep.xhat_limit) < 1e-12
        ok &= abs(counts[r] - ref[r]) <= 0.2 * ref[r]
    dt = time.perf_counter() - t0
    c = [counts[r] for r in ref]
    ok &= all(u > v for u, v in zip(c, c[1:])) and dt < 2.0
    return bool(ok), f"counts {counts} (reference {ref}); {dt:.2f} s"


def criterion_5() -> tuple[bool, str]:
    ex = builtin_example("ex3", eps=1.0)
    p = ex.problem
    x0 = stein_initial(p, ex.feedback)
    opts = IterationOptions(tol=1e-15, max_iter=7, record_history=True, detect_stagnation=False)
    rep = afpi_run(p, x0, 100, opts)
    norms = [spectral_norm(x0)] + [spectral_norm(x) for x, _ in rep.history]
    ratios = [norms[k] / norms[k - 1] for k in range(2, len(norms))]
    ok = len(norms) == 8 and all(5e-3 <= q <= 2e-2 for q in ratios) and norms[7] <= 1e-12
    t0 = time.perf_counter()
    try:
        nrep = newton_run(p, x0, IterationOptions(tol=1e-15, max_iter=200))
        newton = f"newton {nrep.termination.value} after {nrep.iterations}"
        newton_ok = nrep.converged
    except SteinBreakdown as exc:
        newton = f"newton SteinBreakdown after {exc.report.iterations}"
        newton_ok = True
    ok &= newton_ok and time.perf_counter() - t0 < 30
    return bool(ok), (f"ratios k=2..7 [{min(ratios):.3g}, {max(ratios):.3g}], "
                      f"||X_hat_7|| {norms[-1]:.2g}; {newton}")


def criterion_6() -> tuple[bool, str]:
    ex = builtin_example("ex4")
    p = ex.problem
    t0 = time.perf_counter()
    # iteration budget of 4 outer steps per sequence
    sol = solve_all(p, 4, _opts(ex, max_iter=4), ex.feedback, dual_feedback=ex.dual_feedback)
    # route A needs G_k to converge, which takes more outer steps
    full = solve_all(p, 4, _opts(ex), ex.feedback, dual_feedback=ex.dual_feedback)
    dt = time.perf_counter() - t0
    errs = {}
    for name in ("x_pM", "x_pm", "x_mM", "x_mm"):
        x = getattr(sol, name)
        errs[name] = _rel(x, ex.expected[name]) if x is not None else float("inf")
    iters = {k: v.iterations for k, v in sol.diagnostics.items()}
    mu_mM = sol.diagnostics["x_mM"].mu_t if "x_mM" in sol.diagnostics else float("nan")
    mu_mm = sol.diagnostics["x_mm"].mu_t if "x_mm" in sol.diagnostics else float("nan")
    agree = full.route_agreement if full.route_agreement is not None else float("inf")
    ok = (all(e <= 1e-10 for e in errs.values()) and all(i <= 4 for i in iters.values())
          and abs(mu_mM - 0.5) <= 1e-8 and abs(mu_mm - 2.0) <= 1e-8 and agree <= 1e-8
          and dt < 0.5)
    err_s = ", ".join(f"{k} {v:.2g}" for k, v in errs.items())
    return ok, (f"rel errs {err_s}; iterations {iters}; mu {mu_mM:.10f}/{mu_mm:.10f}; "
                f"routes agree {agree:.2g}; {dt * 1e3:.0f} ms")


def criterion_7() -> tuple[bool, str]:
    worst = 0.0
    for n in range(1, 6):
        worst = max(worst, verify_semigroup(50, seed=n, n=n),
                    verify_semigroup(50, seed=100 + n, n=n, complex_=True))
    return worst <= 1e-9, f"max associativity residual {worst:.2g} (n=1..5, real and complex)"


FLOW_CASES = {
    "ex1": [(2, 8), (3, 5), (4, 4), (16, 2), (256, 1)],
    "ex4": [(2, 12), (3, 7), (4, 6), (8, 4), (16, 3), (64, 2), (4096, 1)],
}


def criterion_8() -> tuple[bool, str]:
    worst, parts = 0.0, []
    for name, cases in FLOW_CASES.items():
        ex = builtin_example(name)
        x0 = stein_initial(ex.problem, ex.feedback)
        w = max(verify_flow(ex.problem, x0, r, k) for r, k in cases)
        parts.append(f"{name} {w:.2g}")
        worst = max(worst, w)
    return worst <= 1e-9, f"max discrepancy {worst:.2g} ({', '.join(parts)})"


def criterion_9(seed: int | None = None) -> tuple[bool, str]:
    rng = rng_from_env(seed)
    worst_id = 0.0
    for i in range(100):
        n = int(rng.integers(1, 7))
        cplx = bool(i % 2)
        p, _ = random_problem(rng, n, complex_=cplx)
        f = rng.standard_normal((p.m, n))
        xhat = random_hermitian(rng, n, cplx, psd=True, scale=rng.uniform(0.1, 3))
        x = random_hermitian(rng, n, cplx, psd=True, scale=rng.uniform(0.1, 3))
        worst_id = max(worst_id, max(identity_residuals(p, f, xhat, x).values()))
    worst_dual, n_spec = 0.0, 0
    for i in range(50):
        n = int(rng.integers(1, 7))
        cplx = bool(i % 2)
        p, _ = random_well_conditioned(rng, n, complex_=cplx)
        x = random_hermitian(rng, n, cplx, psd=True, scale=rng.uniform(0.5, 3)) + 0.1 * np.eye(n)
        worst_dual = max(worst_dual, max(verify_duality(p, x).values()))
        sol = _max_solution(p)
        res = verify_duality(p, sol)
        n_spec += "dual1_spectrum" in res
        worst_dual = max(worst_dual, max(res.values()))
    ok = worst_id <= 1e-10 and worst_dual <= 1e-9 and n_spec == 50
    return ok, (f"identities max {worst_id:.2g} (100 instances); duality max {worst_dual:.2g} "
                f"(50 instances, spectra checked on {n_spec})")


def _max_solution(p):
    f = default_stabilizing_feedback(p)
    rep = afpi_run(p, stein_initial(p, f), 2, IterationOptions(tol=1e-14))
    return rep.xhat_limit


def criterion_10(seed: int | None = None) -> tuple[bool, str]:
    rng = rng_from_env(seed)
    fails, emitted, worst_gap, worst_nres = [], 0, 0.0, 0.0
    opts = IterationOptions(tol=1e-14, max_iter=100)
    for i in range(50):
        n = int(rng.integers(1, 6))
        p, c = random_problem(rng, n, complex_=bool(i % 3 == 2))
        try:
            fpi_run(p, np.zeros((n, n)), opts)
            f = default_stabilizing_feedback(p)
            dec = fpi_run(p, stein_initial(p, f), opts)
            if max(dec.rho_t_history) > 1 + 1e-8:
                fails.append(f"#{i}: closed loop left the disk")
        except MonotonicityViolated as exc:
            fails.append(f"#{i}: {exc}")
            continue
        sol = solve_all(p, 2, opts, c=c)
        worst_gap = min(worst_gap, ordering_gap(sol))
        for name, x in sol.solutions().items():
            emitted += 1
            worst_nres = max(worst_nres, nres(p, x))
            if not inner_min_eig(p, x) > 0:
                fails.append(f"#{i}: R + B^H X B not positive definite for {name}")
    ok = not fails and worst_gap >= -1e-9 and worst_nres <= 1e-13
    detail = (f"{emitted} solutions emitted; worst ordering gap {worst_gap:.2g}; "
              f"worst nres {worst_nres:.2g}")
    if fails:
        detail += "; " + "; ".join(fails[:3])
    return ok, detail


CRITERIA: dict[int, tuple[str, Callable[[], tuple[bool, str]]]] = {
    1: ("ex1 exactness", criterion_1),
    2: ("ex1 diagnostics", criterion_2),
    3: ("ex2 closed form", criterion_3),
    4: ("ex3 eps=0 iteration counts", criterion_4),
    5: ("ex3 eps=1 error ratios", criterion_5),
    6: ("ex4 extremal solutions", criterion_6),
    7: ("semigroup", criterion_7),
    8: ("discrete flow", criterion_8),
    9: ("identities", criterion_9),
    10: ("monotonicity and ordering", criterion_10),
}


def run_criterion(number: int) -> CriterionResult:
    title, fn = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure, reported like one
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(number, title, bool(ok), detail, time.perf_counter() - t0)


def run_suite(out=print) -> list[CriterionResult]:
    results = []
    for number in CRITERIA:
        res = run_criterion(number)
        out(res.line())
        results.append(res)
    return results
