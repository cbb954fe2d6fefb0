import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from extremal_dare.afpi import (TripleState, afpi_run, binary_f, compose_fr, verify_flow,
                                verify_semigroup)
from extremal_dare.builtin import builtin_example
from extremal_dare.core import DareProblem, riccati_apply
from extremal_dare.errors import SingularDelta
from extremal_dare.iterations import IterationOptions, Termination, stein_initial
from extremal_dare.linalg import spectral_norm

from conftest import rel
from strategies import problems, seeds

# NRes of X_hat_k and H_k for ex1 with AFPI(2), frozen from a reference run
EX1_NRES_XHAT = [5.74264e-04, 7.08403e-06, 1.07971e-09, 3.26536e-18]
EX1_NRES_H = [2.43902e-02, 1.46843e-03, 5.72210e-06, 8.73115e-11, 2.08167e-17]


def ex1_run(**kw):
    ex = builtin_example("ex1")
    return afpi_run(ex.problem, stein_initial(ex.problem, ex.feedback), 2,
                    IterationOptions(tol=1e-14, **kw))


def test_ex1_limits_and_counts():
    rep = ex1_run()
    assert rep.converged and rep.termination_h == Termination.CONVERGED
    assert rel(rep.xhat_limit, np.diag([8.0, 4 / 3])) <= 1e-14
    assert rel(rep.h_limit, np.diag([0.0, 4 / 3])) <= 1e-14
    assert (rep.iterations_xhat, rep.iterations_h) == (4, 5)
    assert rep.restarts == 0


def test_ex1_residual_history_frozen():
    steps = ex1_run().steps
    xs = [s.nres_xhat for s in steps if s.nres_xhat is not None]
    hs = [s.nres_h for s in steps]
    assert np.allclose(xs, EX1_NRES_XHAT, rtol=1e-4)
    assert np.allclose(hs, EX1_NRES_H, rtol=1e-4)


def test_ex1_closed_loop_radii():
    for s in ex1_run().steps:
        if s.rho_t_xhat is not None:
            assert s.rho_t_xhat == pytest.approx(0.5, abs=1e-12)
        assert s.rho_t_h == pytest.approx(3.0, abs=1e-10)


def test_first_step_is_r_plain_steps():
    """X_hat_1 = R^r(X_hat_0) and H_1 = R^r(0)."""
    ex = builtin_example("ex4")
    p, x0 = ex.problem, stein_initial(ex.problem, ex.feedback)
    rep = afpi_run(p, x0, 3, IterationOptions(tol=1e-300, max_iter=1, record_history=True,
                                              detect_stagnation=False))
    xh, triple = rep.history[0]
    want_x, want_h = x0, np.zeros((2, 2))
    for _ in range(3):
        want_x, want_h = riccati_apply(p, want_x), riccati_apply(p, want_h)
    assert rel(xh, want_x) <= 1e-12
    assert rel(triple.h, want_h) <= 1e-12


@pytest.mark.parametrize("r, count", [(2, 50), (4, 25), (8, 17), (100, 8)])
def test_ex3_counts_eps0(r, count):
    ex = builtin_example("ex3")
    rep = afpi_run(ex.problem, stein_initial(ex.problem, ex.feedback), r,
                   IterationOptions(tol=ex.tol))
    assert rep.converged
    assert abs(rep.iterations_xhat - count) <= 0.2 * count
    assert spectral_norm(rep.xhat_limit) <= 1e-12


def test_ex3_eps1_ratio():
    ex = builtin_example("ex3", eps=1.0)
    x0 = stein_initial(ex.problem, ex.feedback)
    rep = afpi_run(ex.problem, x0, 100, IterationOptions(
        tol=1e-15, max_iter=7, record_history=True, detect_stagnation=False))
    norms = [spectral_norm(x) for x, _ in rep.history]
    ratios = np.array(norms[1:]) / np.array(norms[:-1])
    assert np.all((ratios > 5e-3) & (ratios < 2e-2))


def test_binary_f_identity_triple():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((3, 3))
    g = np.eye(3)
    h = np.diag([1.0, 2.0, 3.0])
    t = TripleState(a, g, h)
    ident = TripleState(np.eye(3), np.zeros((3, 3)), np.zeros((3, 3)))
    for u in (binary_f(t, ident), binary_f(ident, t)):
        assert np.allclose(u.a, t.a) and np.allclose(u.g, t.g) and np.allclose(u.h, t.h)


def test_compose_matches_repeated_binary():
    ex = builtin_example("ex4")
    t = TripleState.initial(ex.problem)
    want = t
    for _ in range(4):
        want = binary_f(want, t)
    got = compose_fr(t, 5)
    assert np.allclose(got.a, want.a) and np.allclose(got.h, want.h)
    assert np.allclose(got.g, want.g)


def test_triple_apply_is_r_power():
    ex = builtin_example("ex1")
    p = ex.problem
    t = compose_fr(TripleState.initial(p), 3)
    x = np.diag([2.0, 5.0])
    want = riccati_apply(p, riccati_apply(p, riccati_apply(p, x)))
    assert np.allclose(t.apply(x), want)


def test_singular_delta_index():
    t = TripleState(np.eye(1), np.ones((1, 1)), -np.ones((1, 1)))
    with pytest.raises(SingularDelta):
        binary_f(t, t)
    with pytest.raises(SingularDelta) as info:
        compose_fr(t, 3)
    assert info.value.index == 1  # failed while forming F_2


def test_r_must_be_at_least_two():
    ex = builtin_example("ex1")
    with pytest.raises(ValueError):
        afpi_run(ex.problem, np.zeros((2, 2)), 1)


@given(seeds, st.integers(1, 5), st.booleans())
def test_semigroup_property(seed, n, cplx):
    assert verify_semigroup(3, seed=seed, n=n, complex_=cplx) <= 1e-9


@pytest.mark.parametrize("r, k", [(2, 8), (3, 5), (16, 2)])
def test_flow_ex1(r, k):
    ex = builtin_example("ex1")
    assert verify_flow(ex.problem, stein_initial(ex.problem, ex.feedback), r, k) <= 1e-9


@given(problems(complex_=False))
def test_flow_random(p):
    from extremal_dare.structure import default_stabilizing_feedback
    x0 = stein_initial(p, default_stabilizing_feedback(p))
    assert verify_flow(p, x0, 3, 3) <= 1e-8


def test_track_g_route_a_ex4():
    ex = builtin_example("ex4")
    rep = afpi_run(ex.problem, stein_initial(ex.problem, ex.feedback), 4,
                   IterationOptions(tol=1e-12), track_g=True)
    assert rep.termination_g == Termination.CONVERGED
    assert rel(-np.linalg.inv(rep.g_limit), ex.expected["x_mm"]) <= 1e-10


def test_scalar_closed_form():
    # x = 1 + 4x/(1+x) has the positive root x = 2 + sqrt(5)
    p = DareProblem.from_matrices(2 * np.eye(1), np.eye(1), h=np.eye(1))
    rep = afpi_run(p, stein_initial(p, np.array([[1.5]])), 2, IterationOptions(tol=1e-15))
    assert rep.xhat_limit[0, 0] == pytest.approx(2 + np.sqrt(5), rel=1e-14)
