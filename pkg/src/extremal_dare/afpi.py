"""Accelerated fixed-point iteration built on a semigroup of triples.

A triple ``(A_k, G_k, H_k)`` represents the map
``X -> H_k + A_k^H X (I + G_k X)^{-1} A_k``; composing the triple of the
problem with itself ``r`` times per outer step gives ``X_hat_k = X_{r^k}``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import COND_LIMIT, DareProblem, closed_loop, nres, riccati_apply
from .errors import Breakdown, SingularDelta, SingularInnerMatrix, SingularPencil
from .iterations import IterationOptions, Termination
from .linalg import cond2, max_eig, min_eig, spectral_norm, spectrum, sym
from .sampling import rng_from_env

log = logging.getLogger(__name__)

FLOW_BUDGET = 4096
MONOTONE_RTOL = 1e-8
PSD_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class TripleState:
    a: np.ndarray
    g: np.ndarray
    h: np.ndarray

    @classmethod
    def initial(cls, p: DareProblem) -> "TripleState":
        return cls(p.a, p.g, p.h)

    def apply(self, x) -> np.ndarray:
        """``H_k + A_k^H X (I + G_k X)^{-1} A_k``."""
        n = self.a.shape[0]
        return sym(self.h + self.a.conj().T @ x @ np.linalg.solve(np.eye(n) + self.g @ x, self.a))

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(m)) for m in (self.a, self.g, self.h))


def binary_f(xk: TripleState, x0: TripleState) -> TripleState:
    """``F(X_k, X_0) = (A_0 D A_k, G_0 + A_0 D G_k A_0^H, H_k + A_k^H H_0 D A_k)``
    with ``D = (I + G_k H_0)^{-1}``.
    """
    n = xk.a.shape[0]
    m = np.eye(n) + xk.g @ x0.h
    if cond2(m) > COND_LIMIT:
        raise SingularDelta("I + G_k H_0 is numerically singular")
    d_a = np.linalg.solve(m, xk.a)  # D A_k
    d_g = np.linalg.solve(m, xk.g)  # D G_k
    return TripleState(
        a=x0.a @ d_a,
        g=sym(x0.g + x0.a @ d_g @ x0.a.conj().T),
        h=sym(xk.h + xk.a.conj().T @ x0.h @ d_a),
    )


def compose_fr(x: TripleState, r: int) -> TripleState:
    """``F_r(X)`` via ``F_{l+1}(X) = F(X, F_l(X))``, ``F_1 = X``."""
    if r < 2:
        raise ValueError("r must be at least 2")
    cur = x
    for ell in range(1, r):
        try:
            cur = binary_f(x, cur)
        except SingularDelta as exc:
            raise SingularDelta(f"{exc} (inner index {ell})", index=ell) from exc
    return cur


@dataclass
class AfpiStep:
    k: int
    nres_xhat: float | None
    nres_h: float | None
    rho_t_xhat: float | None
    rho_t_h: float | None
    mu_t_xhat: float | None
    mu_t_h: float | None
    norm_a: float
    nres_g: float | None = None
    restarted: bool = False
    triple_psd: bool = True  # G_k, H_k >= 0, expected when G, H >= 0


@dataclass
class SequenceState:
    value: np.ndarray | None = None
    nres: float = float("inf")
    iterations: int = 0
    termination: Termination | None = None
    history: list[float] = field(default_factory=list)
    # best iterate by the unnormalized residual ||X - R(X)||; NRes is scale
    # invariant and cannot rank iterates that approach a zero solution
    best: np.ndarray | None = None
    best_abs: float = float("inf")
    best_k: int = 0

    @property
    def done(self) -> bool:
        return self.termination is not None

    def stop(self, term: Termination):
        if self.termination is None:
            self.termination = term


@dataclass
class AfpiReport:
    r: int
    xhat0: np.ndarray
    xhat_limit: np.ndarray | None
    h_limit: np.ndarray | None
    g_limit: np.ndarray | None
    steps: list[AfpiStep]
    iterations_xhat: int
    iterations_h: int
    iterations_g: int
    termination_xhat: Termination
    termination_h: Termination
    termination_g: Termination | None
    restarts: int = 0
    attempts: int = 0
    history: list[tuple[np.ndarray, TripleState]] | None = None

    @property
    def converged(self) -> bool:
        return self.termination_xhat == Termination.CONVERGED


def _diagnostics(target, x):
    """(nres, ||X - R(X)||, rho(T_X), mu(T_X)) with None where undefined."""
    try:
        res = nres(target, x)
        err = spectral_norm(x - riccati_apply(target, x))
    except SingularPencil:
        return float("nan"), float("nan"), None, None
    try:
        s = spectrum(closed_loop(target, x).t)
        return res, err, s.rho, s.mu
    except (SingularInnerMatrix, np.linalg.LinAlgError, ArithmeticError):
        return res, err, None, None


def afpi_run(p: DareProblem, xhat0, r: int = 2, opts: IterationOptions | None = None, *,
             target: DareProblem | None = None, sign: float = 1.0,
             track_g: bool = False, restart: bool = True) -> AfpiReport:
    """Accelerated fixed-point iteration AFPI(r).

    The triple ``(A, G, H)`` is advanced by ``r``-fold composition each outer
    step; ``X_hat_k`` is formed from the fixed ``xhat0`` and ``H_k`` comes
    from the triple itself.  Each sequence stops on its own residual
    (``nres <= tol``) or when the residual stagnates.

    Parameters
    ----------
    p : problem whose triple is iterated.
    xhat0 : starting matrix for the ``X_hat`` sequence.
    r : composition order, at least 2 (``r = 2`` is the doubling recursion).
    opts : stopping options; ``tol`` applies to every tracked sequence.
    target, sign : residuals and closed-loop spectra are measured for
        ``sign * X`` on ``target`` (default ``p`` and ``+1``).  The dual
        driver uses ``target=original`` and ``sign=-1``.
    track_g : also follow ``G_k`` until it solves the second-kind dual.
    restart : when a step breaks down (singular ``I + G_k H_0``, overflow)
        or ``X_hat`` loses the monotone direction set by its first step,
        the step is discarded and the triple restarts from ``(A, G, H)``
        with the best ``X_hat`` so far as the new fixed start.  ``H_k`` and
        ``G_k`` cannot be continued and are frozen.  A restart whose first
        step does not improve the best ``X_hat`` ends the run.

    ``xhat_limit`` is the accepted iterate with the smallest unnormalized
    residual ``||X - R(X)||``; it is the last one whenever the residual
    decreases.

    Raises ``SingularDelta`` or ``Breakdown`` only if no step succeeds.
    """
    from .duals import build_second_kind

    if r < 2:
        raise ValueError("r must be at least 2")
    opts = opts or IterationOptions()
    target = target or p
    xhat0 = sym(np.asarray(xhat0))
    triple0 = TripleState.initial(p)
    triple, base = triple0, xhat0
    xs, hs = SequenceState(value=xhat0), SequenceState()
    gs = SequenceState() if track_g else None
    d2 = build_second_kind(p).problem if track_g else None
    steps: list[AfpiStep] = []
    history = [] if opts.record_history else None
    restarts = attempts = 0
    just_restarted = False
    direction = 0  # +1 nondecreasing, -1 nonincreasing, 0 undetermined
    k = 0

    def seqs():
        return [s for s in (xs, hs, gs) if s is not None]

    while k < opts.max_iter and not all(s.done for s in seqs()):
        attempts += 1
        event = None
        xh = None
        try:
            new = compose_fr(triple, r)
            if not new.is_finite():
                raise Breakdown("non-finite triple")
            if not xs.done or history is not None:
                xh = new.apply(base)
                if not np.all(np.isfinite(xh)):
                    raise Breakdown("non-finite X_hat")
        except (SingularDelta, Breakdown, np.linalg.LinAlgError) as exc:
            event = exc
        if event is None and not xs.done and restart:
            ref = base if just_restarted else xs.value
            d = xh - ref
            tol = MONOTONE_RTOL * max(spectral_norm(xh), spectral_norm(ref))
            if k == 0:
                direction = -1 if max_eig(d) <= tol else (1 if min_eig(d) >= -tol else 0)
            elif direction and max_eig(-direction * d) > tol:
                event = Breakdown(f"X_hat lost monotonicity at step {k + 1}")
        if event is not None:
            log.debug("afpi step %d rejected: %s", k + 1, event)
            if restart and not xs.done and k > 0 and not just_restarted:
                restarts += 1
                just_restarted = True
                triple, base = triple0, xs.best
                for s in (hs, gs):
                    if s is not None:
                        s.stop(Termination.BREAKDOWN)
                continue
            if k == 0:
                raise event if isinstance(event, (SingularDelta, Breakdown)) else Breakdown(str(event))
            for s in seqs():
                s.stop(Termination.BREAKDOWN)
            break

        k += 1
        triple = new
        if history is not None:
            history.append((xh, new))
        step = AfpiStep(k, None, None, None, None, None, None, spectral_norm(new.a),
                        restarted=just_restarted, triple_psd=_psd_triple(new))
        if not xs.done:
            nx, ex, step.rho_t_xhat, step.mu_t_xhat = _diagnostics(target, sign * xh)
            step.nres_xhat = nx
            improved = ex < xs.best_abs
            _advance(xs, xh, nx, ex, k, opts)
            if just_restarted and not improved:
                xs.stop(Termination.STAGNATED)
        if not hs.done:
            nh, eh, step.rho_t_h, step.mu_t_h = _diagnostics(target, sign * new.h)
            step.nres_h = nh
            _advance(hs, new.h, nh, eh, k, opts)
        if gs is not None and not gs.done:
            ng, eg, _, _ = _diagnostics(d2, new.g)
            step.nres_g = ng
            _advance(gs, new.g, ng, eg, k, opts)
        just_restarted = False
        steps.append(step)

    for s in seqs():
        s.stop(Termination.MAX_ITER)
    return AfpiReport(
        r=r, xhat0=xhat0,
        xhat_limit=xs.best if xs.best_k else None,
        h_limit=hs.best, g_limit=gs.best if gs else None,
        steps=steps,
        iterations_xhat=xs.best_k, iterations_h=hs.best_k,
        iterations_g=gs.best_k if gs else 0,
        termination_xhat=xs.termination, termination_h=hs.termination,
        termination_g=gs.termination if gs else None,
        restarts=restarts, attempts=attempts, history=history,
    )


def _advance(seq: SequenceState, value, res, err, k, opts):
    seq.value, seq.nres, seq.iterations = value, res, k
    seq.history.append(res)
    if err < seq.best_abs or seq.best is None or res == 0.0:
        seq.best, seq.best_abs, seq.best_k = value, err, k
    if res <= opts.tol:
        seq.stop(Termination.CONVERGED)
    elif opts.detect_stagnation and _stagnating(seq.history):
        seq.stop(Termination.STAGNATED)


def _psd_triple(t: TripleState) -> bool:
    ok = True
    for m in (t.g, t.h):
        ok &= min_eig(m) >= -PSD_RTOL * max(1.0, spectral_norm(m))
    return bool(ok)


def _stagnating(hist, window=5, factor=0.99):
    h = [v for v in hist if np.isfinite(v)]
    return len(h) > window and h[-1] > factor * h[-1 - window]


def _random_triple(rng, n, complex_):
    def mat(*shape):
        m = rng.standard_normal(shape)
        if complex_:
            m = m + 1j * rng.standard_normal(shape)
        return m

    a = mat(n, n)
    a *= 0.9 / max(spectral_norm(a), 1e-12)
    g = mat(n, n)
    g = g @ g.conj().T
    g /= max(spectral_norm(g), 1e-12)
    h = mat(n, n)
    h = h @ h.conj().T
    h /= max(spectral_norm(h), 1e-12)
    return TripleState(a, sym(g), sym(h))


def _triple_gap(x: TripleState, y: TripleState) -> float:
    return max(spectral_norm(u - v) / max(1.0, spectral_norm(u))
               for u, v in ((x.a, y.a), (x.g, y.g), (x.h, y.h)))


def verify_semigroup(samples: int = 50, seed: int | None = None, n: int = 4,
                     complex_: bool = False) -> float:
    """Max discrepancy of ``F(F(Y, Z), W)`` against ``F(Y, F(Z, W))`` over
    random triples.  Seed defaults to ``$DARE_SEED`` (or 0)."""
    rng = rng_from_env(seed)
    worst = 0.0
    for _ in range(samples):
        for attempt in range(10):
            y, z, w = (_random_triple(rng, n, complex_) for _ in range(3))
            try:
                lhs = binary_f(binary_f(y, z), w)
                rhs = binary_f(y, binary_f(z, w))
                break
            except SingularDelta:
                if attempt == 9:
                    raise
        worst = max(worst, _triple_gap(lhs, rhs))
    return worst


def _gap(x, y):
    return spectral_norm(x - y) / max(1.0, spectral_norm(y))


def verify_flow(p: DareProblem, xhat0, r: int, k_max: int) -> float:
    """Compare AFPI(r) against brute-force plain iteration.

    Checks ``X_hat_k = X_{r^k}`` (plain iteration from ``xhat0``),
    ``H_k = X_{r^k}`` (plain iteration from 0) and ``G_k = Z_{r^k - 1}``
    (second-kind dual iteration from ``G``) for ``k = 1..k_max``.  Returns
    the largest relative discrepancy.
    """
    from .duals import build_second_kind

    if r < 2:
        raise ValueError("r must be at least 2")
    if k_max == 0:
        return 0.0
    steps = r ** k_max
    if steps > FLOW_BUDGET:
        raise ValueError(f"r^k_max = {steps} exceeds the oracle budget {FLOW_BUDGET}")
    d2 = build_second_kind(p).problem
    x, h0, z = sym(np.asarray(xhat0)), np.zeros((p.n, p.n)), p.g.copy()
    xs, hs, zs = [x], [h0], [z]
    for _ in range(steps):
        x = TripleState.initial(p).apply(x)
        h0 = TripleState.initial(p).apply(h0)
        z = TripleState.initial(d2).apply(z)
        xs.append(x)
        hs.append(h0)
        zs.append(z)
    if not all(np.all(np.isfinite(m)) for m in (x, h0, z)):
        raise Breakdown("oracle iteration overflowed")
    opts = IterationOptions(tol=1e-300, max_iter=k_max, monotonicity_check=False,
                            record_history=True, detect_stagnation=False)
    rep = afpi_run(p, xhat0, r, opts, restart=False)
    worst = 0.0
    for k, (xh, t) in enumerate(rep.history, start=1):
        j = r ** k
        worst = max(worst, _gap(xh, xs[j]), _gap(t.h, hs[j]), _gap(t.g, zs[j - 1]))
    return worst
