"""Exception hierarchy shared across the package."""


class SemError(Exception):
    """Base class for every error raised by pregid."""


# -- model structure ---------------------------------------------------------

class DiagramError(SemError, ValueError):
    """Invalid causal diagram input.

    ``item`` is the position of the offending edge in the combined
    ``directed + bidirected`` input list, when the error concerns an edge.
    ``line`` is filled in by the parser.
    """

    def __init__(self, message: str, item: int | None = None, line: int | None = None):
        super().__init__(message)
        self.message = message
        self.item = item
        self.line = line

    def __str__(self) -> str:
        if self.line is not None:
            return f"line {self.line}: {self.message}"
        return self.message


class DuplicateVariable(DiagramError):
    pass


class InvalidName(DiagramError):
    pass


class UnknownVariable(DiagramError):
    pass


class OrderViolation(DiagramError):
    pass


class SelfLoop(DiagramError):
    pass


class DuplicateEdge(DiagramError):
    pass


class ModelSyntaxError(DiagramError):
    pass


class MissingVarLine(DiagramError):
    pass


class IndexOutOfRange(SemError, IndexError):
    pass


class EndpointInConditioningSet(SemError, ValueError):
    pass


# -- parameters and covariances ----------------------------------------------

class ParameterizationError(SemError, ValueError):
    pass


class SupportMismatch(ParameterizationError):
    pass


class NotPositiveDefinite(ParameterizationError):
    pass


class CovarianceError(SemError, ValueError):
    pass


class DimensionMismatch(CovarianceError):
    pass


class NotSymmetric(CovarianceError):
    pass


class UnknownLabel(CovarianceError):
    pass


# -- numerics ----------------------------------------------------------------

class SingularSubmatrix(SemError, ArithmeticError):
    pass


class DivisionByZero(SemError, ZeroDivisionError):
    pass


class IllConditionedExpression(SemError, ArithmeticError):
    pass


class NonPositiveVariance(SemError, ArithmeticError):
    pass


# -- identification ----------------------------------------------------------

class NotAParent(SemError, ValueError):
    pass


class MalformedPath(SemError, ValueError):
    pass


class Def2ViolationInternal(SemError, AssertionError):
    """An accessory set produced by the flow search failed validation (a bug)."""


class DegenerateBlock(SemError, ArithmeticError):
    """A self-contained block whose coefficient matrix vanishes on random trials."""
