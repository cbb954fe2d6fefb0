"""Dense matrix kernel: validation, spectra, norms and the Stein solver."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (AsymmetryTooLarge, DimensionMismatch, EigenSolverFailure,
                     NonSquare, SingularSteinOperator)

HERMITIAN_RTOL = 1e-13
# smallest admissible |1 - lam_i conj(lam_j)| for the Stein operator
STEIN_SEPARATION = 1e-13


def as_matrix(m, name="matrix", square=False) -> np.ndarray:
    """Return ``m`` as a finite 2-D float or complex array."""
    out = np.array(m, copy=True)
    if out.ndim == 0:
        out = out.reshape(1, 1)
    elif out.ndim == 1:
        out = out.reshape(-1, 1)
    if out.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {out.shape}")
    if not np.iscomplexobj(out):
        out = out.astype(float)
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} has non-finite entries")
    if square and out.shape[0] != out.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {out.shape}")
    return out


def sym(m: np.ndarray) -> np.ndarray:
    """Hermitian part ``(M + M^H)/2`` without any check."""
    return 0.5 * (m + m.conj().T)


def hermitianize(m, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Symmetrize ``m`` after checking its skew part is only roundoff.

    Raises ``AsymmetryTooLarge`` when ``||M - M^H||_F > rtol * ||M||_F``.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")
    scale = np.linalg.norm(m)
    skew = np.linalg.norm(m - m.conj().T)
    if skew > rtol * scale:
        raise AsymmetryTooLarge(
            f"asymmetry {skew:.3g} exceeds {rtol:g} * {scale:.3g}")
    return sym(m)


@dataclass(frozen=True)
class SpectrumSummary:
    eigenvalues: np.ndarray
    rho: float
    mu: float
    rho_disk: float | None  # largest modulus strictly inside the unit disk


def eigenvalues(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise EigenSolverFailure("matrix has non-finite entries")
    try:
        return np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverFailure(str(exc)) from exc


def spectrum(m) -> SpectrumSummary:
    """Eigenvalues with spectral radius, smallest modulus and rho_disk.

    >>> s = spectrum(np.diag([3.0, 0.5]))
    >>> s.rho, s.mu, s.rho_disk
    (3.0, 0.5, 0.5)
    """
    lam = eigenvalues(m)
    mod = np.abs(lam)
    inside = mod[mod < 1.0]
    return SpectrumSummary(
        eigenvalues=lam,
        rho=float(mod.max()),
        mu=float(mod.min()),
        rho_disk=float(inside.max()) if inside.size else None,
    )


def spectral_norm(m) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def min_eig(m) -> float:
    return float(np.linalg.eigvalsh(sym(np.asarray(m)))[0])


def max_eig(m) -> float:
    return float(np.linalg.eigvalsh(sym(np.asarray(m)))[-1])


def is_psd(m, tol: float = 0.0) -> bool:
    """``min eig(M) >= -tol`` for the Hermitian part of ``M``."""
    return min_eig(m) >= -tol


def is_pd(m) -> bool:
    return min_eig(m) > 0.0


def cond2(m) -> float:
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def matrix_rank(m, rtol: float) -> int:
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def stein_apply(a, x) -> np.ndarray:
    """``S_A(X) = X - A^H X A``."""
    return x - a.conj().T @ x @ a


def solve_stein(a, q) -> np.ndarray:
    """Solve ``X - A^H X A = Q`` for ``X``.

    Parameters
    ----------
    a : (n, n) array
    q : (n, n) array

    Returns
    -------
    x : (n, n) array, Hermitian whenever ``q`` is.

    Raises ``SingularSteinOperator`` when some product of eigenvalues
    ``lam_i * conj(lam_j)`` is numerically 1.

    >>> solve_stein(np.diag([0.0, 0.5]), np.diag([9.0, 1.0]))
    array([[9.        , 0.        ],
           [0.        , 1.33333333]])
    """
    a = as_matrix(a, "A", square=True)
    q = as_matrix(q, "Q", square=True)
    n = a.shape[0]
    if q.shape != (n, n):
        raise DimensionMismatch(f"Q has shape {q.shape}, expected {(n, n)}")
    lam = eigenvalues(a)
    sep = np.abs(1.0 - np.outer(lam, lam.conj()))
    if sep.min() < STEIN_SEPARATION:
        raise SingularSteinOperator(
            f"1 - lam_i conj(lam_j) = {sep.min():.3g}; Stein operator singular")
    # vec(A^H X A) = (A^T kron A^H) vec(X) with column-major vec
    k = np.eye(n * n) - np.kron(a.T, a.conj().T)
    try:
        v = np.linalg.solve(k, q.reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise SingularSteinOperator(str(exc)) from exc
    x = v.reshape(n, n, order="F")
    if np.allclose(q, q.conj().T, rtol=0, atol=1e-12 * max(1.0, np.abs(q).max())):
        x = sym(x)
    return x
