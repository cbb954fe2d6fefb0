import numpy as np
import pytest
from hypothesis import given

from extremal_dare.builtin import builtin_example
from extremal_dare.core import (DareProblem, closed_loop, identity_residuals, inner_min_eig,
                                k_term, nres, riccati_apply, riccati_apply_classic)
from extremal_dare.errors import DimensionMismatch, SingularInnerMatrix, SingularPencil
from extremal_dare.linalg import spectral_norm

from strategies import problems, psd_matrices


def ex1():
    return builtin_example("ex1").problem


def test_from_matrices_c_gives_h():
    p = ex1()
    assert np.array_equal(p.h, np.diag([0.0, 1.0]))
    assert np.array_equal(p.g, np.diag([1.0, 0.0]))
    assert (p.n, p.m, p.is_complex) == (2, 1, False)


def test_from_matrices_validation():
    a = np.eye(2)
    with pytest.raises(DimensionMismatch):
        DareProblem.from_matrices(a, np.ones((3, 1)))
    with pytest.raises(ValueError, match="positive definite"):
        DareProblem.from_matrices(a, np.ones((2, 1)), r=np.zeros((1, 1)))
    with pytest.raises(ValueError, match="not both"):
        DareProblem.from_matrices(a, np.ones((2, 1)), h=np.eye(2), c=np.eye(2))
    with pytest.raises(ValueError, match="semidefinite"):
        DareProblem.from_matrices(a, np.ones((2, 1)), h=-np.eye(2))
    p = DareProblem.from_matrices(a, np.ones((2, 1)), h=-np.eye(2), check_h=False)
    assert p.h[0, 0] == -1


def test_ex1_fixed_points():
    p = ex1()
    for x in (np.diag([8.0, 4 / 3]), np.diag([0.0, 4 / 3])):
        assert np.allclose(riccati_apply(p, x), x, atol=1e-15)
        assert nres(p, x) <= 1e-15


def test_ex1_closed_loop():
    cl = closed_loop(ex1(), np.diag([8.0, 4 / 3]))
    assert np.allclose(cl.f, [[8 / 3, 0.0]])
    assert np.allclose(cl.t, np.diag([1 / 3, 0.5]))
    assert np.allclose(cl.inner, [[9.0]])


def test_nres_zero_over_zero():
    p = builtin_example("ex3").problem
    assert nres(p, np.zeros((8, 8))) == 0.0


def test_singular_pencil():
    p = DareProblem.from_matrices(np.eye(1), np.ones((1, 1)))
    with pytest.raises(SingularPencil):
        riccati_apply(p, -np.ones((1, 1)))
    with pytest.raises(SingularInnerMatrix):
        closed_loop(p, -np.ones((1, 1)))


@given(problems(), psd_matrices(5, scale=2.0))
def test_resolvent_and_classic_forms_agree(p, x):
    x = x[:p.n, :p.n]
    a, b = riccati_apply(p, x), riccati_apply_classic(p, x)
    assert spectral_norm(a - b) <= 1e-10 * max(1.0, spectral_norm(a))


@given(problems(), psd_matrices(5, scale=2.0), psd_matrices(5, scale=2.0))
def test_order_preserving(p, x, d):
    """X <= Y implies R(X) <= R(Y) on the PSD cone."""
    x, y = x[:p.n, :p.n], x[:p.n, :p.n] + d[:p.n, :p.n]
    gap = riccati_apply(p, y) - riccati_apply(p, x)
    assert np.linalg.eigvalsh(gap).min() >= -1e-10 * max(1.0, spectral_norm(gap))


@given(problems(), psd_matrices(5, scale=3.0), psd_matrices(5, scale=0.5))
def test_identities_hold_everywhere(p, xhat, x):
    rng = np.random.default_rng(p.n)
    f = rng.standard_normal((p.m, p.n))
    res = identity_residuals(p, f, xhat[:p.n, :p.n], x[:p.n, :p.n])
    assert set(res) == {"req_a", "req_b", "req_c", "k1", "k2", "k3"}
    assert max(res.values()) <= 1e-10


def test_identities_at_ex1_solution():
    p = ex1()
    x = np.diag([8.0, 4 / 3])
    res = identity_residuals(p, np.array([[3.0, 0.0]]), x, x)
    assert res["k3"] <= 1e-12
    res0 = identity_residuals(p, np.array([[3.0, 0.0]]), x, np.zeros((2, 2)))
    assert res0["req_a"] <= 1e-12


def test_k_term_vanishes_at_own_feedback(rng):
    p = ex1()
    x = np.diag([2.0, 1.0])
    assert spectral_norm(k_term(p, closed_loop(p, x).f, x)) <= 1e-15
    assert inner_min_eig(p, x) == pytest.approx(3.0)
