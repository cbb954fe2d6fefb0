"""Built-in test problems with their known solutions and initial feedbacks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DareProblem
from .errors import UnknownExample

S17 = np.sqrt(17.0)


@dataclass(frozen=True, eq=False)
class BuiltinExample:
    problem: DareProblem
    feedback: np.ndarray  # F with A - B F d-stable
    dual_feedback: np.ndarray | None = None  # for the first-kind dual, hat convention
    c: np.ndarray | None = None
    expected: dict[str, np.ndarray] = field(default_factory=dict)
    tol: float = 1e-14


def example1() -> BuiltinExample:
    a = np.diag([3.0, 0.5])
    b = np.array([[1.0], [0.0]])
    c = np.array([[0.0, 1.0]])
    p = DareProblem.from_matrices(a, b, np.eye(1), c=c, name="ex1")
    return BuiltinExample(
        p, np.array([[3.0, 0.0]]), c=c,
        expected={"x_pM": np.diag([8.0, 4 / 3]), "x_pm": np.diag([0.0, 4 / 3])},
    )


def example2() -> BuiltinExample:
    a = np.zeros((5, 5))
    a[0, 0] = a[1, 1] = 2.9
    a[0, 1] = 1.0
    a[4, 4] = 1.0
    h = np.zeros((5, 5))
    h[2, 2] = h[3, 3] = 200.0
    h[2, 3] = h[3, 2] = -0.5
    h[4, 4] = 1.0
    b = np.diag([np.sqrt(2.0), 1.0, 0.0, 0.0, 1.0])
    p = DareProblem.from_matrices(a, b, np.eye(5), h=h, name="ex2")
    x_pm = h.copy()
    x_pm[4, 4] = (1 + np.sqrt(5.0)) / 2
    return BuiltinExample(p, np.diag([2.0, 3.0, 0.0, 0.0, 0.5]),
                          expected={"x_pm": x_pm})


def example3(eps: float = 0.0) -> BuiltinExample:
    a = np.zeros((8, 8))
    a[:3, :3] = [[-1.0, 0.0, 0.0], [0.0, 1.0, eps], [0.0, 0.0, 1.0]]
    s3 = np.sqrt(3.0) / 2
    a[3:5, 3:5] = [[s3, 0.5], [-0.5, s3]]
    a[5:, 5:] = [[0.5, 1.0, 0.0], [0.0, 0.5, 1.0], [0.0, 0.0, 0.5]]
    b = np.zeros((8, 8))
    b[0, 0] = 1.0
    b[1, :3] = [1.0, 1.0, eps]
    for i in range(2, 8):
        b[i, i - 1] = b[i, i] = 1.0
    p = DareProblem.from_matrices(a, b, np.eye(8), h=np.zeros((8, 8)),
                                  name=f"ex3(eps={eps:g})")
    zero = np.zeros((8, 8))
    return BuiltinExample(p, np.diag([-1.0, 1, 1, 1, 1, 0.1, 0.1, 0.1]),
                          expected={"x_pM": zero, "x_pm": zero}, tol=1e-15)


def example4() -> BuiltinExample:
    a = np.array([[4.0, 3.0], [-4.5, -3.5]])
    b = np.array([[6.0], [-5.0]])
    h = np.array([[9.0, 6.0], [6.0, 4.0]])
    p = DareProblem.from_matrices(a, b, np.eye(1), h=h, name="ex4")
    x_pM = np.array([[4.5 + 9 * S17 / 8, 3 + 3 * S17 / 4],
                     [3 + 3 * S17 / 4, 2 + S17 / 2]])
    x_mM = np.array([[4.5 - 9 * S17 / 8, 3 - 3 * S17 / 4],
                     [3 - 3 * S17 / 4, 2 - S17 / 2]])
    x_mm = np.array([[-103 / 12 - S17 / 8, -39 / 4 - S17 / 4],
                     [-39 / 4 - S17 / 4, -43 / 4 - S17 / 2]])
    # [0.62, 0.52] stabilizes A^{-1} - A^{-1} B F; shifted by Rt^{-1} Ct = [24, 16]/65
    # it stabilizes the dual closed loop Ahat - Bhat F
    f_dual = np.array([[0.62, 0.52]]) - np.array([[24.0, 16.0]]) / 65.0
    return BuiltinExample(
        p, np.array([[-0.58, -0.68]]), dual_feedback=f_dual,
        expected={"x_pM": x_pM, "x_pm": x_pM, "x_mM": x_mM, "x_mm": x_mm},
        tol=1e-12,
    )


EXAMPLES = {"ex1": example1, "ex2": example2, "ex3": example3, "ex4": example4}


def builtin_example(name: str, eps: float = 0.0) -> BuiltinExample:
    try:
        make = EXAMPLES[name]
    except KeyError:
        raise UnknownExample(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None
    return make(eps) if name == "ex3" else make()
