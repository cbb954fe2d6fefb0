"""Random problem generators for property checks."""
from __future__ import annotations

import os

import numpy as np

from .core import DareProblem
from .linalg import spectral_norm, spectrum, sym


def rng_from_env(seed: int | None = None) -> np.random.Generator:
    """Generator seeded by ``seed`` or, if None, by ``$DARE_SEED`` (default 0)."""
    if seed is None:
        seed = int(os.environ.get("DARE_SEED", "0"))
    return np.random.default_rng(seed)


def _mat(rng, rows, cols, complex_):
    m = rng.standard_normal((rows, cols))
    if complex_:
        m = m + 1j * rng.standard_normal((rows, cols))
    return m


def random_hermitian(rng, n, complex_=False, psd=False, scale=1.0) -> np.ndarray:
    m = _mat(rng, n, n, complex_)
    h = m @ m.conj().T if psd else m + m.conj().T
    return scale * sym(h) / max(spectral_norm(h), 1e-300)


def _orthogonal(rng, n, complex_):
    q, r = np.linalg.qr(_mat(rng, n, n, complex_))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _conditioned(rng, rows, cols, complex_, lo, hi):
    """Random matrix with singular values drawn from [lo, hi]."""
    k = min(rows, cols)
    u = _orthogonal(rng, rows, complex_)[:, :k]
    v = _orthogonal(rng, cols, complex_)[:k]
    return (u * rng.uniform(lo, hi, k)) @ v


def random_well_conditioned(rng, n, m=None, complex_=False) -> tuple[DareProblem, np.ndarray]:
    """Random problem with ``A``, ``B``, ``C`` and ``R`` all of condition at most 4.

    ``C`` is square, so ``H > 0`` and every solution above ``H`` is invertible.
    """
    m = m or int(rng.integers(1, n + 1))
    a = _conditioned(rng, n, n, complex_, 0.5, 2.0)
    b = _conditioned(rng, n, m, complex_, 0.5, 2.0)
    c = _conditioned(rng, n, n, complex_, 0.5, 2.0)
    r = np.eye(m) + sym(random_hermitian(rng, m, complex_, psd=True, scale=1.0))
    return DareProblem.from_matrices(a, b, r, c=c, name="random"), c


def random_problem(rng, n, m=None, complex_=False, radius=None,
                   n_out=None) -> tuple[DareProblem, np.ndarray]:
    """Random ``(A, B, R, C)`` with ``H = C^H C``.

    ``A`` is rescaled to spectral radius ``radius`` (drawn from [0.3, 1.8]
    when None).  Generic draws are controllable and observable.
    """
    m = m or int(rng.integers(1, n + 1))
    n_out = n_out or int(rng.integers(1, n + 1))
    a = _mat(rng, n, n, complex_)
    radius = rng.uniform(0.3, 1.8) if radius is None else radius
    a *= radius / spectrum(a).rho
    b = _mat(rng, n, m, complex_)
    c = _mat(rng, n_out, n, complex_)
    w = _mat(rng, m, m, complex_)
    r = sym(w @ w.conj().T) + np.eye(m)
    return DareProblem.from_matrices(a, b, r, c=c, name="random"), c
