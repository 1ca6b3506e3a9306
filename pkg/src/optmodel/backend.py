"""The interface every solver backend implements.

A backend receives a model either in one call (:meth:`Backend.load`) or as a
stream of deltas (:meth:`Backend.apply`, incremental backends only), solves
it in :meth:`Backend.optimize`, and exposes a :class:`SolveResults` record.

The reference backends in :mod:`optmodel.solvers` derive from
:class:`ReferenceBackend`, which keeps its state as a
:class:`~optmodel.data.ModelData` and enforces the declared capabilities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from . import attributes as attrs
from .data import (
    CONTINUOUS,
    SCALAR_AFFINE,
    AddConstraint,
    AddVariable,
    ModelData,
    SetAttribute,
    SetIntegrality,
    function_kind,
)
from .errors import (
    ExpiredContext,
    NotIncremental,
    UnknownAttribute,
    UnsupportedByBackend,
    UnsupportedCallback,
    UnsupportedConstraint,
)
from .expr import AffExpr, VariableRef, as_expr
from .sets import SCALAR_LINEAR_SETS
from .status import CallbackKind, NodeStatus, ResultStatus, TerminationStatus


@dataclass(frozen=True)
class BackendCapabilities:
    incremental: bool = True
    sets: frozenset = frozenset()  # (function kind, set class) pairs
    integrality: bool = False
    quadratic_objective: bool = False
    attributes: frozenset = frozenset()  # (scope, name) pairs
    provides_duals: bool = False
    callbacks: frozenset = frozenset()
    supports_iis: bool = False
    max_results: Optional[int] = 1

    def supports_set(self, kind: str, set_) -> bool:
        return (kind, type(set_)) in self.sets

    def supports_attribute(self, key) -> bool:
        return key.ident in self.attributes


LINEAR_SET_SUPPORT = frozenset((SCALAR_AFFINE, s) for s in SCALAR_LINEAR_SETS)


@dataclass
class SolveResults:
    termination: TerminationStatus = TerminationStatus.OPTIMIZE_NOT_CALLED
    primal_status: ResultStatus = ResultStatus.NO_SOLUTION
    dual_status: ResultStatus = ResultStatus.NO_SOLUTION
    # each solution is (values indexed by variable index, objective value)
    solutions: list = field(default_factory=list)
    duals: dict = field(default_factory=dict)
    objective_bound: float = math.nan
    solve_time: float = 0.0
    raw_status: str = ""
    ray: Any = None
    error: Optional[BaseException] = None
    stats: dict = field(default_factory=dict)

    @property
    def result_count(self) -> int:
        return len(self.solutions)


class Backend:
    """Abstract solver endpoint."""

    name = "Backend"
    capabilities = BackendCapabilities()

    def load(self, data: ModelData) -> None:
        raise NotImplementedError

    def apply(self, delta) -> Any:
        raise NotIncremental(f"{self.name} does not accept incremental modifications")

    def optimize(self) -> None:
        raise NotImplementedError

    def results(self) -> SolveResults:
        raise NotImplementedError

    def set_attribute(self, key, value, target=None) -> None:
        raise UnknownAttribute(f"{self.name} has no attribute {key}")

    def get_attribute(self, key, target=None):
        raise UnknownAttribute(f"{self.name} has no attribute {key}")

    def set_callback(self, kind: CallbackKind, fn: Callable) -> None:
        raise UnsupportedCallback(f"{self.name} does not support {kind.value} callbacks")

    def optimizer_index(self, index: int) -> int:
        raise UnsupportedByBackend(f"{self.name} does not expose column indices")

    def state_digest(self) -> str:
        raise UnsupportedByBackend(f"{self.name} does not expose its state")


def backend_load(b: Backend, snapshot: ModelData) -> None:
    b.load(snapshot)


def backend_apply(b: Backend, delta) -> Any:
    if not b.capabilities.incremental:
        raise NotIncremental(f"{b.name} is a one-shot backend")
    return b.apply(delta)


def first_unsupported(data: ModelData, caps: BackendCapabilities):
    """Return a description of the first (function, set) the backend rejects."""
    for index, e in sorted(data.constraints.items()):
        if not caps.supports_set(e.kind, e.set):
            return f"constraint {index}: ({e.kind}, {type(e.set).__name__})"
    if not caps.integrality and data.has_integers():
        v = next(i for i in data.live_variables() if data.kind[i] != CONTINUOUS)
        return f"variable {v}: integrality restriction"
    if not caps.quadratic_objective and getattr(data.objective, "qterms", None):
        return "objective: scalar-quadratic"
    return None


class ReferenceBackend(Backend):
    """Shared plumbing for the in-repo backends: state, capability checks, attributes."""

    def __init__(self):
        self.data = ModelData()
        self.options: dict[str, Any] = {}
        self.var_attributes: dict[tuple[str, int], Any] = {}
        self.callbacks: dict[CallbackKind, Callable] = {}
        self._results = SolveResults()

    # -- loading -------------------------------------------------------------
    def load(self, data: ModelData) -> None:
        problem = first_unsupported(data, self.capabilities)
        if problem is not None:
            raise UnsupportedConstraint(f"{self.name} does not support {problem}")
        self.data = data.copy()
        self.var_attributes = {
            (k[0], k[2]): v for k, v in data.attributes.items() if k[1] == "variable"
        }
        self._results = SolveResults()

    def apply(self, delta) -> Any:
        caps = self.capabilities
        if not caps.incremental:
            raise NotIncremental(f"{self.name} is a one-shot backend")
        if isinstance(delta, AddConstraint):
            kind = function_kind(delta.function)
            if not caps.supports_set(kind, delta.set):
                raise UnsupportedConstraint(
                    f"{self.name} does not support ({kind}, {type(delta.set).__name__})"
                )
        elif isinstance(delta, (AddVariable, SetIntegrality)):
            if delta.kind != CONTINUOUS and not caps.integrality:
                raise UnsupportedConstraint(f"{self.name} does not support integrality restrictions")
        elif isinstance(delta, SetAttribute):
            self.set_attribute(delta.key, delta.value, delta.target)
            return None
        elif hasattr(delta, "function") and getattr(delta.function, "qterms", None):
            if not caps.quadratic_objective:
                raise UnsupportedConstraint(f"{self.name} does not support a quadratic objective")
        self._results = SolveResults()
        return self.data.apply(delta)

    def state_digest(self) -> str:
        return self.data.digest()

    def optimizer_index(self, index: int) -> int:
        self.data.check_variable(index)
        return sum(1 for a in self.data.alive[:index] if a)

    # -- attributes --------------------------------------------------------------
    def set_attribute(self, key, value, target=None) -> None:
        key = attrs.resolve(key)
        if key.scope != "model" and not self.capabilities.supports_attribute(key):
            raise UnsupportedByBackend(f"{self.name} does not support attribute {key.name!r}")
        value = attrs.check_value(key, value)
        if key.scope == "optimizer":
            self.options[key.name] = value
        elif key.scope == "variable":
            self.data.check_variable(target)
            self.var_attributes[(key.name, target)] = value
        else:
            self.data.attributes[(key.name, key.scope, target)] = value

    def get_attribute(self, key, target=None):
        key = attrs.resolve(key)
        if key.scope != "model" and not self.capabilities.supports_attribute(key):
            raise UnsupportedByBackend(f"{self.name} does not support attribute {key.name!r}")
        if key.scope == "optimizer":
            if key.name not in self.options:
                raise UnknownAttribute(f"optimizer attribute {key.name!r} is not set")
            return self.options[key.name]
        if key.scope == "variable":
            return self.var_attributes[(key.name, target)]
        return self.data.attributes[(key.name, key.scope, target)]

    def set_callback(self, kind: CallbackKind, fn: Callable) -> None:
        if kind not in self.capabilities.callbacks:
            raise UnsupportedCallback(f"{self.name} does not support {kind.value} callbacks")
        if fn is None:
            self.callbacks.pop(kind, None)
        else:
            self.callbacks[kind] = fn

    def results(self) -> SolveResults:
        return self._results

    def time_limit(self) -> float:
        return self.options.get("time_limit", math.inf)


# -- callbacks -----------------------------------------------------------------

@dataclass
class InfeasibleSubmission:
    """Record of a heuristic solution that failed the feasibility check."""

    node: int
    reasons: list


class CallbackContext:
    """Per-invocation view handed to lazy, user-cut and heuristic callbacks.

    Valid only while the callback runs; afterwards every method raises
    :class:`~optmodel.errors.ExpiredContext`.
    """

    def __init__(self, kind: CallbackKind, node_status: NodeStatus, values, backend,
                 allowed: frozenset, node: int = 0):
        self.kind = kind
        self._node_status = node_status
        self._values = values
        self._backend = backend
        self._allowed = allowed
        self.node = node
        self.live = True
        self.lazy: list = []
        self.cuts: list = []
        self.heuristic: list = []

    def _check(self):
        if not self.live:
            raise ExpiredContext("callback context used after the callback returned")

    def node_status(self) -> NodeStatus:
        self._check()
        return self._node_status

    def value(self, x):
        """Candidate value of a variable (or an affine expression) at this node."""
        self._check()
        if isinstance(x, VariableRef):
            return float(self._values[x.index])
        return as_expr(x).evaluate_indexed(self._values)

    @property
    def backend(self):
        self._check()
        return self._backend

    def submit(self, kind: CallbackKind, payload) -> None:
        self._check()
        if kind not in self._allowed:
            raise UnsupportedCallback(f"{kind.value} submissions are not supported here")
        if kind is CallbackKind.HEURISTIC:
            self.heuristic.append(_assignment_by_index(payload))
            return
        f, s = payload
        f = as_expr(f)
        if not isinstance(f, AffExpr) or not isinstance(s, SCALAR_LINEAR_SETS):
            raise UnsupportedConstraint("callback constraints must be scalar affine with a linear set")
        f = f.canonicalize()
        s = s.shifted(f.constant)
        f = AffExpr(f.owner, 0.0, f.terms)
        if kind is CallbackKind.LAZY and self._node_status is NodeStatus.INTEGER:
            self.lazy.append((f, s))
        else:
            # a lazy constraint offered at a fractional node is treated as a cut
            self.cuts.append((f, s))

    def expire(self):
        self.live = False


def _assignment_by_index(payload) -> dict:
    out = {}
    for k, v in dict(payload).items():
        out[k.index if isinstance(k, VariableRef) else int(k)] = float(v)
    return out


def callback_value(ctx: CallbackContext, x):
    return ctx.value(x)


def node_status(ctx: CallbackContext) -> NodeStatus:
    return ctx.node_status()


def submit(ctx: CallbackContext, kind: CallbackKind, payload) -> None:
    ctx.submit(kind, payload)
