import numpy as np
import pytest
from hypothesis import given

from extremal_dare.builtin import builtin_example
from extremal_dare.core import DareProblem
from extremal_dare.errors import NotStabilizable
from extremal_dare.structure import (analyze, default_stabilizing_feedback, is_dstable,
                                     krylov_rank, pbh_defect)

from strategies import problems


def test_ex1_witnesses():
    ex = builtin_example("ex1")
    st = analyze(ex.problem, ex.c)
    assert st.stabilizable and not st.controllable and not st.antistab_rank_ok
    assert st.detectable is False
    tests = {(w.test, w.eigenvalue) for w in st.witnesses}
    assert ("antistabilizable", 0.5) in tests
    assert ("detectable", 3.0) in tests


@pytest.mark.parametrize("name, controllable, a_nonsingular", [
    ("ex2", False, False), ("ex3", True, True), ("ex4", True, True)])
def test_examples_structure(name, controllable, a_nonsingular):
    st = analyze(builtin_example(name).problem)
    assert st.stabilizable
    assert st.controllable is controllable
    assert st.a_nonsingular is a_nonsingular
    assert st.controllable_krylov == st.controllable_pbh


def test_detectable_unknown_without_c():
    assert analyze(builtin_example("ex4").problem).detectable is None


def test_as_dict_is_json_ready():
    import json
    d = analyze(builtin_example("ex1").problem).as_dict()
    assert json.loads(json.dumps(d))["witnesses"][0]["rank_defect"] == 1


def test_pbh_and_krylov_small():
    a = np.diag([3.0, 0.5])
    b = np.array([[1.0], [0.0]])
    assert pbh_defect(a, b, 0.5) == 1
    assert pbh_defect(a, b, 3.0) == 0
    assert krylov_rank(a, b) == 1


@given(problems())
def test_krylov_agrees_with_pbh(p):
    st = analyze(p)
    assert st.controllable_krylov == st.controllable_pbh


@given(problems())
def test_default_feedback_stabilizes(p):
    f = default_stabilizing_feedback(p)
    assert f.shape == (p.m, p.n)
    assert is_dstable(p.a - p.b @ f)


def test_default_feedback_zero_for_stable_a():
    p = DareProblem.from_matrices(np.diag([0.5, -0.2]), np.ones((2, 1)))
    assert not np.any(default_stabilizing_feedback(p))


def test_not_stabilizable():
    p = DareProblem.from_matrices(np.diag([2.0, 0.5]), np.array([[0.0], [1.0]]))
    assert not analyze(p).stabilizable
    with pytest.raises(NotStabilizable):
        default_stabilizing_feedback(p)
