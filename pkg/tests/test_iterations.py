import numpy as np
import pytest
from hypothesis import given

from extremal_dare.builtin import builtin_example
from extremal_dare.core import DareProblem
from extremal_dare.errors import InsufficientHistory, MonotonicityViolated, NotDStable, SteinBreakdown
from extremal_dare.iterations import (IterationOptions, Termination, fpi_dual2_run, fpi_run,
                                      newton_run, rate_estimate, stein_initial)
from extremal_dare.linalg import spectral_norm
from extremal_dare.structure import default_stabilizing_feedback

from strategies import problems

from conftest import rel


def ex1():
    return builtin_example("ex1")


def test_options_validation():
    with pytest.raises(ValueError):
        IterationOptions(tol=0)
    with pytest.raises(ValueError):
        IterationOptions(max_iter=0)


def test_stein_initial_ex1():
    ex = ex1()
    assert np.allclose(stein_initial(ex.problem, ex.feedback), np.diag([9.0, 4 / 3]))
    with pytest.raises(NotDStable):
        stein_initial(ex.problem, np.zeros((1, 2)))


def test_fpi_from_zero_reaches_minimal_ex1():
    rep = fpi_run(ex1().problem, np.zeros((2, 2)), IterationOptions(tol=1e-14))
    assert rep.converged
    assert rel(rep.x, np.diag([0.0, 4 / 3])) <= 1e-12
    # the residual of the (2,2) block contracts by rho(A_22)^2 = 1/4
    assert rep.rate_estimate == pytest.approx(0.25, rel=1e-6)


def test_fpi_from_stein_reaches_maximal_ex1():
    ex = ex1()
    rep = fpi_run(ex.problem, stein_initial(ex.problem, ex.feedback), IterationOptions(tol=1e-14))
    assert rep.converged
    assert rel(rep.x, np.diag([8.0, 4 / 3])) <= 1e-12
    assert max(rep.rho_t_history) < 1


def test_fpi_max_iter_and_history():
    rep = fpi_run(ex1().problem, np.zeros((2, 2)),
                  IterationOptions(tol=1e-14, max_iter=3, record_history=True))
    assert rep.termination == Termination.MAX_ITER
    assert rep.iterations == 3 and len(rep.history) == 4
    assert len(rep.nres_history) == 4


def test_fpi_monotonicity_violation_detected():
    # x0 = -2 leaves I + G X indefinite: R(-2) = 2 (up), then R(2) = 2/3 (down)
    p = DareProblem.from_matrices(np.eye(1), np.ones((1, 1)))
    with pytest.raises(MonotonicityViolated) as info:
        fpi_run(p, -2 * np.ones((1, 1)), IterationOptions(tol=1e-14))
    assert info.value.report.termination == Termination.MONOTONICITY_VIOLATED
    rep = fpi_run(p, -2 * np.ones((1, 1)),
                  IterationOptions(tol=1e-14, max_iter=5, monotonicity_check=False))
    assert rep.iterations == 5


@given(problems())
def test_fpi_monotone_property(p):
    opts = IterationOptions(tol=1e-13, max_iter=60, record_history=True)
    up = fpi_run(p, np.zeros((p.n, p.n)), opts)
    for a, b in zip(up.history, up.history[1:]):
        d = b - a
        assert np.linalg.eigvalsh(d).min() >= -1e-9 * max(1.0, spectral_norm(b))
    down = fpi_run(p, stein_initial(p, default_stabilizing_feedback(p)), opts)
    for a, b in zip(down.history, down.history[1:]):
        d = a - b
        assert np.linalg.eigvalsh(d).min() >= -1e-9 * max(1.0, spectral_norm(a))


def test_newton_quadratic_ex1():
    ex = ex1()
    rep = newton_run(ex.problem, stein_initial(ex.problem, ex.feedback))
    assert rep.converged and rep.iterations <= 4
    assert rel(rep.x, np.diag([8.0, 4 / 3])) <= 1e-13
    h = rep.nres_history
    assert h[2] <= 10 * h[1] ** 2 / h[0]


def test_newton_breakdown_on_unit_circle():
    ex = builtin_example("ex3", eps=1.0)
    with pytest.raises(SteinBreakdown) as info:
        newton_run(ex.problem, stein_initial(ex.problem, ex.feedback),
                   IterationOptions(tol=1e-15))
    assert info.value.report.termination == Termination.BREAKDOWN


def test_fpi_dual2_gives_minimal_negative_ex4():
    ex = builtin_example("ex4")
    rep = fpi_dual2_run(ex.problem, np.zeros((2, 2)), IterationOptions(tol=1e-13))
    assert rep.converged
    assert rel(-np.linalg.inv(rep.x), ex.expected["x_mm"]) <= 1e-10


def test_rate_estimate():
    assert rate_estimate([1, 1 / 4, 1 / 16, 1 / 64]) == pytest.approx(0.25)
    sup = [0.5 ** (2 ** k) for k in range(5)]
    assert rate_estimate(sup, "r_superlinear", r=2) == pytest.approx(0.5)
    with pytest.raises(InsufficientHistory):
        rate_estimate([1, 0.5])
    with pytest.raises(ValueError):
        rate_estimate([1, 0.5, 0.25, 0.1], "r_superlinear")
    with pytest.raises(ValueError):
        rate_estimate([1, 0.5, 0.25, 0.1], "bogus")


def test_stagnation_terminates():
    # a zero-gain scalar problem on the unit circle: error decays like 1/k
    p = DareProblem.from_matrices(np.eye(1), np.ones((1, 1)))
    rep = fpi_run(p, np.ones((1, 1)), IterationOptions(tol=1e-15, max_iter=10000))
    assert rep.termination in (Termination.STAGNATED, Termination.MAX_ITER)
    assert rep.x[0, 0] > 0
