"""Exception hierarchy shared by the modeling layer and the reference backends."""


class ModelingError(Exception):
    """Base class for every error raised by optmodel."""


# expressions
class MixedModels(ModelingError):
    pass


class MissingValue(ModelingError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing value"


# model construction and mutation
class InvalidBounds(ModelingError, ValueError):
    pass


class ShapeMismatch(ModelingError, ValueError):
    pass


class InvalidConstraint(ModelingError, ValueError):
    pass


class StaleReference(ModelingError):
    pass


class VariableInUse(ModelingError):
    pass


class UnsupportedModification(ModelingError):
    pass


class UnboundedComplementsVariable(ModelingError, ValueError):
    pass


class ModelMutationInCallback(ModelingError):
    pass


# attributes and registration
class UnknownAttribute(ModelingError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown attribute"


class TypeMismatch(ModelingError, TypeError):
    pass


class DuplicateRegistration(ModelingError):
    pass


# backends
class UnsupportedByBackend(ModelingError):
    pass


class UnsupportedConstraint(UnsupportedByBackend):
    pass


class UnsupportedCallback(UnsupportedByBackend):
    pass


class NotIncremental(ModelingError):
    pass


class NoOptimizerAttached(ModelingError):
    pass


class SolverChangeInDirectMode(ModelingError):
    pass


# results
class NoResultAvailable(ModelingError):
    pass


class ResultIndexOutOfRange(ModelingError, IndexError):
    pass


# callbacks
class ExpiredContext(ModelingError):
    pass


class CallbackError(ModelingError):
    """Wraps an exception raised by a user callback; the solve stops with OTHER_ERROR."""


# bridges
class UnboundedIndicatorBigM(ModelingError):
    pass


class UnboundedComplementsBigM(ModelingError):
    pass


# solvers
class NotLinear(ModelingError):
    pass


class NumericalFailure(ModelingError):
    pass


class NotInfeasible(ModelingError):
    pass


class NotConvex(ModelingError):
    pass


class NotSymmetric(ModelingError, ValueError):
    pass


class UnboundedDomain(ModelingError):
    pass


class Infeasible(ModelingError):
    pass


# file format
class UnsupportedInDialect(ModelingError):
    pass


class ParseError(ModelingError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownSection(ParseError):
    pass


# benchmark harness
class EmptyReport(ModelingError, ValueError):
    pass


class OutOfMemory(ModelingError, MemoryError):
    """A benchmark size did not fit in memory."""

    def __init__(self, family: str, size: int):
        super().__init__(f"out of memory generating {family}-{size}")
        self.family = family
        self.size = size
