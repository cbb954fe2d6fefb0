"""Exception hierarchy shared by every module of the package."""


class DareError(Exception):
    """Base class for all package errors."""


class NonSquare(DareError, ValueError):
    pass


class DimensionMismatch(DareError, ValueError):
    pass


class AsymmetryTooLarge(DareError, ValueError):
    pass


class EigenSolverFailure(DareError, ArithmeticError):
    pass


class SingularSteinOperator(DareError, ArithmeticError):
    pass


class SingularPencil(DareError, ArithmeticError):
    """``I + G X`` is numerically singular, i.e. ``X`` is outside dom(R)."""


class SingularInnerMatrix(DareError, ArithmeticError):
    """``R + B^H X B`` is numerically singular."""


class SingularDelta(DareError, ArithmeticError):
    """``I + G_k H_0`` is numerically singular inside the triple recursion."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularA(DareError, ArithmeticError):
    pass


class SingularX(DareError, ArithmeticError):
    pass


class CrossCheckFailed(DareError, ArithmeticError):
    pass


class NotStabilizable(DareError, ValueError):
    pass


class FeedbackSearchFailed(DareError, ArithmeticError):
    pass


class NotDStable(DareError, ValueError):
    pass


class InsufficientHistory(DareError, ValueError):
    pass


class IterationError(DareError, ArithmeticError):
    """An iteration stopped abnormally; ``report`` holds the partial run."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class Breakdown(IterationError):
    pass


class MonotonicityViolated(IterationError):
    pass


class SteinBreakdown(IterationError):
    pass


class ParseError(DareError, ValueError):
    pass


class ValidationError(DareError, ValueError):
    def __init__(self, message, path=None):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class UnknownExample(DareError, KeyError):
    pass
