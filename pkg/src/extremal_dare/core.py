"""Riccati operator, closed loop, K-terms and the normalized residual.

A problem is stored in resolvent form ``R(X) = H + A^H X (I + G X)^{-1} A``
with ``G = B R^{-1} B^H``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularInnerMatrix, SingularPencil
from .linalg import (as_matrix, cond2, hermitianize, is_pd, is_psd, min_eig,
                     spectral_norm, stein_apply, sym)

# condition number above which a matrix to be inverted counts as singular
COND_LIMIT = 1e14


@dataclass(frozen=True, eq=False)
class DareProblem:
    """Coefficients ``(A, B, R, H)`` plus the derived ``G = B R^{-1} B^H``."""

    a: np.ndarray
    b: np.ndarray
    r: np.ndarray
    h: np.ndarray
    g: np.ndarray
    name: str = ""

    @classmethod
    def from_matrices(cls, a, b, r=None, h=None, c=None, name="",
                      check_h=True) -> "DareProblem":
        """Validate and build a problem.

        Exactly one of ``h`` and ``c`` may be given; ``H = C^H C``.  With
        neither, ``H = 0``.  ``R`` defaults to the identity.  Set
        ``check_h=False`` for dual problems whose ``H`` may be indefinite.
        """
        a = as_matrix(a, "A", square=True)
        n = a.shape[0]
        b = as_matrix(b, "B")
        if b.shape[0] != n:
            raise DimensionMismatch(f"B has {b.shape[0]} rows, A is {n}x{n}")
        m = b.shape[1]
        r = np.eye(m) if r is None else hermitianize(as_matrix(r, "R", square=True))
        if r.shape != (m, m):
            raise DimensionMismatch(f"R has shape {r.shape}, expected {(m, m)}")
        if not is_pd(r):
            raise ValueError("R must be positive definite")
        if h is not None and c is not None:
            raise ValueError("give H or C, not both")
        if c is not None:
            c = as_matrix(c, "C")
            if c.shape[1] != n:
                raise DimensionMismatch(f"C has {c.shape[1]} columns, expected {n}")
            h = sym(c.conj().T @ c)
        elif h is None:
            h = np.zeros((n, n))
        else:
            h = hermitianize(as_matrix(h, "H", square=True))
            if h.shape != (n, n):
                raise DimensionMismatch(f"H has shape {h.shape}, expected {(n, n)}")
            if check_h and not is_psd(h, 1e-12 * max(1.0, spectral_norm(h))):
                raise ValueError("H must be positive semidefinite")
        g = sym(b @ np.linalg.solve(r, b.conj().T))
        return cls(a, b, r, h, g, name)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]

    @property
    def is_complex(self) -> bool:
        return any(np.iscomplexobj(v) for v in (self.a, self.b, self.r, self.h))


@dataclass(frozen=True)
class ClosedLoop:
    f: np.ndarray  # F_X = (R + B^H X B)^{-1} B^H X A
    t: np.ndarray  # T_X = A - B F_X = (I + G X)^{-1} A
    inner: np.ndarray  # R + B^H X B


def _pencil_solve(p: DareProblem, x, rhs):
    m = np.eye(p.n) + p.g @ x
    if cond2(m) > COND_LIMIT:
        raise SingularPencil("I + G X is numerically singular")
    return np.linalg.solve(m, rhs)


def riccati_term(p: DareProblem, x) -> np.ndarray:
    """``A^H X (I + G X)^{-1} A``."""
    return sym(p.a.conj().T @ x @ _pencil_solve(p, x, p.a))


def riccati_apply(p: DareProblem, x) -> np.ndarray:
    """``R(X) = H + A^H X (I + G X)^{-1} A``.

    Raises ``SingularPencil`` when ``I + G X`` is numerically singular.
    """
    return p.h + riccati_term(p, x)


def riccati_apply_classic(p: DareProblem, x) -> np.ndarray:
    """``H + A^H X A - A^H X B (R + B^H X B)^{-1} B^H X A``; equals R(X) on dom(R)."""
    ah = p.a.conj().T
    bxa = p.b.conj().T @ x @ p.a
    inner = p.r + p.b.conj().T @ x @ p.b
    return sym(p.h + ah @ x @ p.a - bxa.conj().T @ np.linalg.solve(inner, bxa))


def closed_loop(p: DareProblem, x) -> ClosedLoop:
    inner = sym(p.r + p.b.conj().T @ x @ p.b)
    if cond2(inner) > COND_LIMIT:
        raise SingularInnerMatrix("R + B^H X B is numerically singular")
    f = np.linalg.solve(inner, p.b.conj().T @ x @ p.a)
    return ClosedLoop(f=f, t=p.a - p.b @ f, inner=inner)


def k_term(p: DareProblem, f, x) -> np.ndarray:
    """``(F - F_X)^H (R + B^H X B) (F - F_X)``."""
    cl = closed_loop(p, x)
    d = f - cl.f
    return sym(d.conj().T @ cl.inner @ d)


def nres(p: DareProblem, z) -> float:
    """Normalized residual
    ``||Z - R(Z)|| / (||Z|| + ||A^H Z (I + G Z)^{-1} A|| + ||H||)``.

    A zero numerator gives 0 even when the denominator vanishes.
    """
    z = np.asarray(z)
    term = riccati_term(p, z)
    num = spectral_norm(z - p.h - term)
    if num == 0.0:
        return 0.0
    den = spectral_norm(z) + spectral_norm(term) + spectral_norm(p.h)
    if den == 0.0:
        return float("inf")
    return num / den


def identity_residuals(p: DareProblem, f, xhat, x) -> dict[str, float]:
    """Norms of the defects of the six residual-form identities.

    Every identity is stated so that it holds for arbitrary Hermitian
    ``xhat`` and ``x`` in the domain; the ones usually quoted only at a
    solution carry the extra ``X - R(X)`` term explicitly.
    """
    ah = lambda m: m.conj().T  # noqa: E731
    e_x = x - riccati_apply(p, x)
    cl = closed_loop(p, x)
    clh = closed_loop(p, xhat)
    a_f = p.a - p.b @ f
    h_f = p.h + ah(f) @ p.r @ f
    h_hat = p.h + ah(clh.f) @ p.r @ clh.f
    k_hx = k_term(p, clh.f, x)
    k_h0 = k_term(p, clh.f, np.zeros_like(x))

    req_a = e_x - (stein_apply(a_f, x) - h_f + k_term(p, f, x))
    req_b = e_x - (stein_apply(clh.t, x) - h_hat + k_hx)
    u_hat = xhat @ clh.t
    u_x = x @ cl.t
    du = u_hat - u_x
    req_c = e_x - (stein_apply(clh.t, x) - h_hat
                   + ah(du) @ (p.g + p.g @ x @ p.g) @ du)
    k1 = stein_apply(clh.t, x) - (p.h + k_h0 - k_hx) - e_x
    k2 = stein_apply(clh.t, xhat) - (xhat - riccati_apply(p, xhat) + p.h + k_h0)
    k3 = stein_apply(cl.t, x) - (p.h + k_term(p, cl.f, np.zeros_like(x))) - e_x
    out = {"req_a": req_a, "req_b": req_b, "req_c": req_c,
           "k1": k1, "k2": k2, "k3": k3}
    return {k: spectral_norm(v) for k, v in out.items()}


def inner_min_eig(p: DareProblem, x) -> float:
    return min_eig(p.r + p.b.conj().T @ x @ p.b)
