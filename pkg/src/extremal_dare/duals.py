"""Dual equations of the first and second kind.

First kind (``A`` nonsingular): ``Y = -X`` turns solutions of the primal
equation into solutions of

    D1(Y) = Hhat + Ahat^H Y (I + Ghat Y)^{-1} Ahat

with ``Ahat = A^{-1}(I + G H^(A))^{-1}``, ``Ghat = Bhat Rhat^{-1} Bhat^H``,
``Hhat = H^(A) - H^(A) B Rhat^{-1} B^H H^(A)``, ``Bhat = A^{-1} B``,
``Rhat = R + B^H H^(A) B`` and ``H^(A) = A^{-H} H A^{-1}``.

Second kind: ``Y = -X^{-1}`` turns them into solutions of

    D2(Y) = G + A Y (I + H Y)^{-1} A^H,

which is stored as a problem with coefficients ``(A^H, H, G)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DareProblem, closed_loop, nres, riccati_apply
from .errors import CrossCheckFailed, SingularA, SingularX
from .linalg import cond2, eigenvalues, spectral_norm, sym
from .structure import A_COND_LIMIT

CROSS_CHECK_RTOL = 1e-10
SOLUTION_NRES = 1e-8


@dataclass(frozen=True)
class TildeCoefficients:
    """Coefficients of the intermediate form of the first-kind dual.

    Solutions ``Y`` satisfy
    ``Y = Ht + At^H Y At - (Ct + Bt^H Y At)^H (Rt + Bt^H Y Bt)^{-1} (Ct + Bt^H Y At)``
    and a feedback stabilizing ``At - Bt F`` maps to the hat convention as
    ``F - Rt^{-1} Ct``.
    """

    a: np.ndarray
    b: np.ndarray
    h: np.ndarray
    c: np.ndarray
    r: np.ndarray


@dataclass(frozen=True, eq=False)
class DualFirstKind:
    problem: DareProblem
    tilde: TildeCoefficients
    h_upper: np.ndarray  # H^(A) = A^{-H} H A^{-1}

    def to_hat_feedback(self, f_tilde) -> np.ndarray:
        """Convert a feedback for ``At - Bt F`` to one for ``Ahat - Bhat F``."""
        t = self.tilde
        return f_tilde - np.linalg.solve(t.r, t.c)


@dataclass(frozen=True, eq=False)
class DualSecondKind:
    problem: DareProblem  # coefficients (A^H, H, G), R = I


def _inv(a):
    if cond2(a) > A_COND_LIMIT:
        raise SingularA("A is numerically singular")
    return np.linalg.inv(a)


def build_first_kind(p: DareProblem) -> DualFirstKind:
    """Dual coefficients of the first kind; ``Hhat`` may be indefinite.

    Raises ``SingularA`` for singular ``A`` and ``CrossCheckFailed`` if the
    two algebraic forms of ``Ahat`` disagree.
    """
    ai = _inv(p.a)
    aih = ai.conj().T
    n = p.n
    h_a = sym(aih @ p.h @ ai)
    bh = ai @ p.b
    c = p.b.conj().T @ h_a
    rh = sym(p.r + c @ p.b)
    ahat = ai - bh @ np.linalg.solve(rh, c)
    other = ai @ np.linalg.inv(np.eye(n) + p.g @ h_a)
    scale = max(1.0, spectral_norm(ahat))
    if spectral_norm(ahat - other) > CROSS_CHECK_RTOL * scale * max(1.0, cond2(rh)):
        raise CrossCheckFailed("the two forms of Ahat disagree")
    hhat = sym(h_a - c.conj().T @ np.linalg.solve(rh, c))
    alt = sym(ahat.conj().T @ p.h @ ai)
    if spectral_norm(hhat - alt) > CROSS_CHECK_RTOL * max(1.0, spectral_norm(hhat)) * max(1.0, cond2(rh)):
        raise CrossCheckFailed("the two forms of Hhat disagree")
    g = sym(bh @ np.linalg.solve(rh, bh.conj().T))
    prob = DareProblem(a=ahat, b=bh, r=rh, h=hhat, g=g,
                       name=f"{p.name}:dual1" if p.name else "dual1")
    tilde = TildeCoefficients(a=ai, b=bh, h=h_a, c=c, r=rh)
    return DualFirstKind(problem=prob, tilde=tilde, h_upper=h_a)


def _psd_factor(h):
    w, v = np.linalg.eigh(sym(h))
    keep = w > 1e-13 * max(1.0, abs(w).max())
    if not keep.any():
        return np.zeros((h.shape[0], 1), dtype=h.dtype)
    return v[:, keep] * np.sqrt(w[keep])


def build_second_kind(p: DareProblem) -> DualSecondKind:
    """Second-kind dual ``D2(Y) = G + A Y (I + H Y)^{-1} A^H``.

    The input factor ``B`` of the stored problem is any ``L`` with
    ``L L^H = H``; only ``G`` and ``H`` enter the iterations.
    """
    b = _psd_factor(p.h)
    prob = DareProblem(a=p.a.conj().T, b=b, r=np.eye(b.shape[1]), h=p.g,
                       g=p.h, name=f"{p.name}:dual2" if p.name else "dual2")
    return DualSecondKind(problem=prob)


def dual1_residual_identity(p: DareProblem, dual: DualFirstKind, x) -> float:
    """Defect of ``(D1(Y) - Y)(I + G H^(A) - G X^(A)) = (I + X G)(R(X) - X)^(A)``
    at ``Y = -X``, where ``M^(A) = A^{-H} M A^{-1}``.
    """
    n = p.n
    ai = dual.tilde.a
    x_a = ai.conj().T @ x @ ai
    y = -x
    dy, rx = riccati_apply(dual.problem, y), riccati_apply(p, x)
    left = np.eye(n) + p.g @ dual.h_upper - p.g @ x_a
    right = np.eye(n) + x @ p.g
    lhs = (dy - y) @ left
    rhs = right @ (ai.conj().T @ (rx - x) @ ai)
    # both sides difference operands that cancel near a solution; measure against them
    scale = max(1.0, (spectral_norm(dy) + spectral_norm(y)) * spectral_norm(left),
                spectral_norm(right) * (spectral_norm(rx) + spectral_norm(x)) * spectral_norm(ai) ** 2)
    return spectral_norm(lhs - rhs) / scale


def dual2_residual_identity(p: DareProblem, dual: DualSecondKind, x) -> float:
    """Defect, relative to the operand sizes, of the pair at ``Y = -X^{-1}``,

        Y - D2(Y) = A [(X - H)^{-1} - (R(X) - H)^{-1}] A^H
        X - R(X)  = A^H [(Y - G)^{-1} - (D2(Y) - G)^{-1}] A
    """
    if cond2(x) > A_COND_LIMIT:
        raise SingularX("X is numerically singular")
    y = -np.linalg.inv(x)
    a, ah = p.a, p.a.conj().T
    rx, dy = riccati_apply(p, x), riccati_apply(dual.problem, y)
    inv = np.linalg.inv
    worst = 0.0
    for (u, du), (v, dv), (m, mh) in (
        ((y, dy), (x - p.h, rx - p.h), (a, ah)),
        ((x, rx), (y - p.g, dy - p.g), (ah, a)),
    ):
        iv, idv = inv(v), inv(dv)
        lhs, rhs = u - du, m @ (iv - idv) @ mh
        scale = max(1.0, spectral_norm(u) + spectral_norm(du),
                    spectral_norm(m) ** 2 * (spectral_norm(iv) + spectral_norm(idv)))
        worst = max(worst, spectral_norm(lhs - rhs) / scale)
    return worst


def _sorted_spectrum(m):
    lam = eigenvalues(m)
    return lam[np.lexsort((np.angle(lam), np.round(np.abs(lam), 10)))]


def _spectra_gap(a, b) -> float:
    """Distance of two spectra after modulus-then-phase sorting, relative to the
    larger matrix norm (eigenvalues are only as accurate as the matrices)."""
    la, lb = _sorted_spectrum(a), _sorted_spectrum(b)
    scale = max(1.0, spectral_norm(a), spectral_norm(b))
    return float(np.max(np.abs(la - lb))) / scale


def verify_duality(p: DareProblem, x) -> dict[str, float]:
    """Scale-relative defects of the duality identities at ``x``.

    ``dual1`` needs ``A`` nonsingular and ``dual2`` needs ``x`` nonsingular;
    entries whose precondition fails are left out.  Both hold for every
    admissible ``x``.  The spectral reciprocity of the dual closed loops
    holds only at solutions, so the ``*_spectrum`` entries are present only
    when ``x`` solves the equation (``nres <= 1e-8``) with ``T_x``
    invertible.
    """
    out = {}
    d1 = build_first_kind(p) if cond2(p.a) < A_COND_LIMIT else None
    x_ok = cond2(x) < A_COND_LIMIT
    if d1 is not None:
        out["dual1"] = dual1_residual_identity(p, d1, x)
    if x_ok:
        out["dual2"] = dual2_residual_identity(p, build_second_kind(p), x)
    if nres(p, x) <= SOLUTION_NRES:
        t = closed_loop(p, x).t
        if cond2(t) < A_COND_LIMIT:
            ti = np.linalg.inv(t)
            if x_ok:
                y2 = -np.linalg.inv(x)
                s2 = np.linalg.solve(np.eye(p.n) + p.h @ y2, p.a.conj().T)
                out["dual2_spectrum"] = _spectra_gap(s2, ti)
            if d1 is not None:
                dp = d1.problem
                s1 = np.linalg.solve(np.eye(p.n) - dp.g @ x, dp.a)
                out["dual1_spectrum"] = _spectra_gap(s1, ti)
    return out


def dual1_map(dual: DualFirstKind, y) -> np.ndarray:
    return riccati_apply(dual.problem, y)


def dual2_map(dual: DualSecondKind, y) -> np.ndarray:
    return riccati_apply(dual.problem, y)
