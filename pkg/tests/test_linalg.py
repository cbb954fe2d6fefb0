import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extremal_dare.errors import (AsymmetryTooLarge, DimensionMismatch, NonSquare,
                                  SingularSteinOperator)
from extremal_dare.linalg import (as_matrix, cond2, hermitianize, is_pd, is_psd, matrix_rank,
                                  solve_stein, spectral_norm, spectrum, stein_apply, sym)

from strategies import seeds


def stein_series(a, q, terms=400):
    """Oracle: X = sum_k (A^H)^k Q A^k for rho(A) < 1."""
    x = np.zeros_like(q, dtype=np.result_type(a, q))
    ak = np.eye(a.shape[0])
    for _ in range(terms):
        x = x + ak.conj().T @ q @ ak
        ak = ak @ a
    return x


def test_stein_matches_series_oracle(rng):
    a = rng.standard_normal((4, 4))
    a *= 0.7 / spectrum(a).rho
    q = rng.standard_normal((4, 4))
    q = q @ q.T
    x = solve_stein(a, q)
    assert np.allclose(x, stein_series(a, q), atol=1e-12)
    assert np.allclose(x, x.T)


def test_stein_example_value():
    x = solve_stein(np.diag([0.0, 0.5]), np.diag([9.0, 1.0]))
    assert np.allclose(x, np.diag([9.0, 4 / 3]))


@given(seeds, st.integers(1, 5), st.booleans())
def test_stein_residual_property(seed, n, cplx):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + (1j * rng.standard_normal((n, n)) if cplx else 0)
    a *= rng.uniform(0.1, 2.5) / max(spectrum(a).rho, 1e-12)
    q = rng.standard_normal((n, n))
    try:
        x = solve_stein(a, q)
    except SingularSteinOperator:
        return
    res = spectral_norm(stein_apply(a, x) - q)
    assert res <= 1e-8 * max(1.0, spectral_norm(x)) * max(1.0, spectral_norm(a)) ** 2


def test_stein_singular_operator():
    with pytest.raises(SingularSteinOperator):
        solve_stein(np.diag([1.0, 0.3]), np.eye(2))
    # lam_i * conj(lam_j) = 1 with |lam| != 1
    with pytest.raises(SingularSteinOperator):
        solve_stein(np.diag([2.0, 0.5]), np.eye(2))


def test_stein_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_stein(np.eye(2) * 0.5, np.eye(3))


def test_as_matrix_rejects():
    with pytest.raises(NonSquare):
        as_matrix(np.ones((2, 3)), square=True)
    with pytest.raises(ValueError):
        as_matrix([[np.nan]])


def test_hermitianize():
    m = np.array([[1.0, 2.0], [2.0 + 1e-15, 3.0]])
    assert np.array_equal(hermitianize(m), hermitianize(m).T)
    with pytest.raises(AsymmetryTooLarge):
        hermitianize(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_spectrum_summary():
    s = spectrum(np.diag([3.0, 0.5]))
    assert s.rho == pytest.approx(3.0)
    assert s.mu == pytest.approx(0.5)
    assert s.rho_disk == pytest.approx(0.5)
    assert spectrum(np.diag([2.0, 3.0])).rho_disk is None


def test_predicates(rng):
    m = rng.standard_normal((3, 3))
    p = sym(m @ m.T)
    assert is_psd(p) and is_pd(p + np.eye(3))
    assert not is_psd(-p - np.eye(3))
    assert matrix_rank(np.outer([1, 2], [3, 4]), 1e-10) == 1
    assert cond2(np.diag([1.0, 1e-3])) == pytest.approx(1e3)
    assert cond2(np.zeros((2, 2))) == np.inf
