from enum import Enum


class TerminationStatus(Enum):
    OPTIMIZE_NOT_CALLED = "OPTIMIZE_NOT_CALLED"
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    DUAL_INFEASIBLE = "DUAL_INFEASIBLE"
    LOCALLY_SOLVED = "LOCALLY_SOLVED"
    TIME_LIMIT = "TIME_LIMIT"
    NODE_LIMIT = "NODE_LIMIT"
    ITERATION_LIMIT = "ITERATION_LIMIT"
    INTERRUPTED = "INTERRUPTED"
    UNSUPPORTED = "UNSUPPORTED"
    OTHER_ERROR = "OTHER_ERROR"

    def __str__(self):
        return self.value


class ResultStatus(Enum):
    NO_SOLUTION = "NO_SOLUTION"
    FEASIBLE_POINT = "FEASIBLE_POINT"
    NEARLY_FEASIBLE_POINT = "NEARLY_FEASIBLE_POINT"
    INFEASIBLE_POINT = "INFEASIBLE_POINT"
    INFEASIBILITY_CERTIFICATE = "INFEASIBILITY_CERTIFICATE"

    def __str__(self):
        return self.value


class NodeStatus(Enum):
    INTEGER = "INTEGER"
    FRACTIONAL = "FRACTIONAL"
    UNKNOWN = "UNKNOWN"


class ObjectiveSense(Enum):
    MIN = "Min"
    MAX = "Max"

    @classmethod
    def parse(cls, sense):
        if isinstance(sense, cls):
            return sense
        s = str(sense).lower()
        if s in ("min", "minimize", "minimise"):
            return cls.MIN
        if s in ("max", "maximize", "maximise"):
            return cls.MAX
        raise ValueError(f"unknown objective sense {sense!r}")


class CallbackKind(Enum):
    LAZY = "lazy"
    USER_CUT = "user_cut"
    HEURISTIC = "heuristic"

