"""The user-facing model.

A :class:`Model` runs in one of two modes.

*Caching* (the default) keeps its own :class:`~optmodel.data.ModelData`.
The attached backend is fed either by replaying the recorded deltas or by a
full load of the bridged image, and it may be swapped at any time with
:meth:`Model.set_optimizer`.

*Direct* (:func:`direct_model`) has no copy of its own.  Each mutation is
forwarded to the backend as exactly one delta.  Bridges are disabled, so
unsupported constraints fail as soon as they are added.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

import numpy as np

from . import attributes as attrs
from .backend import Backend, SolveResults, backend_apply
from .bridges import BridgeMap, bridge_model
from .data import (
    BINARY,
    CONTINUOUS,
    INTEGER,
    MATRIX_AFFINE,
    SCALAR_AFFINE,
    SCALAR_QUADRATIC,
    VECTOR_AFFINE,
    AddConstraint,
    AddVariable,
    DeleteConstraint,
    DeleteVariable,
    ModelData,
    ModifyCoefficient,
    SetAttribute,
    SetBounds,
    SetIntegrality,
    SetName,
    SetObjective,
    function_kind,
    function_variables,
    parse_kind,
)
from .errors import (
    InvalidBounds,
    InvalidConstraint,
    MixedModels,
    ModelMutationInCallback,
    NoOptimizerAttached,
    NoResultAvailable,
    NotIncremental,
    ResultIndexOutOfRange,
    ShapeMismatch,
    SolverChangeInDirectMode,
    UnboundedComplementsVariable,
    UnsupportedByBackend,
    UnsupportedModification,
)
from .expr import AffExpr, QuadExpr, VariableRef, as_expr
from .sets import (
    SCALAR_LINEAR_SETS,
    Binary,
    Complements,
    Indicator,
    Integer,
    PSDCone,
    UserSet,
    registered_set,
)
from .status import CallbackKind, ObjectiveSense, ResultStatus, TerminationStatus

_model_ids = itertools.count(1)

EMPTY, DIRTY, IN_SYNC = "EMPTY", "DIRTY", "IN_SYNC"


@dataclass(frozen=True, eq=False)
class ConstraintRef:
    model: Any
    index: int
    function_kind: str

    def __hash__(self):
        return hash((self.model.id, self.index, "c"))

    def __eq__(self, other):
        return (isinstance(other, ConstraintRef) and other.index == self.index
                and other.model.id == self.model.id)

    @property
    def name(self) -> str:
        return self.model.data.check_constraint(self.index).name

    def __repr__(self):
        return f"ConstraintRef({self.name or self.index})"


@dataclass(frozen=True, eq=False)
class IntegralityRef:
    """Handle returned when ``x in Integer()`` / ``x in Binary()`` is added as a constraint."""

    model: Any
    variable: int
    kind: str

    def __hash__(self):
        return hash((self.model.id, self.variable, "int"))

    def __eq__(self, other):
        return (isinstance(other, IntegralityRef) and other.variable == self.variable
                and other.model.id == self.model.id)


@dataclass(frozen=True)
class BoundRef:
    """A variable bound as an IIS member; ``side`` is ``"lower"`` or ``"upper"``."""

    variable: VariableRef
    side: str


class OptimizerFactory:
    """A backend constructor bundled with optimizer attributes.

    Calling it builds a fresh backend and applies the pairs, so two factories
    derived from the same base never share state.
    """

    def __init__(self, factory: Callable[[], Backend], pairs: Iterable = ()):
        if isinstance(factory, OptimizerFactory):
            pairs = list(factory.pairs) + list(pairs)
            factory = factory.factory
        self.factory = factory
        self.pairs = tuple(pairs)

    def __call__(self) -> Backend:
        b = self.factory()
        for name, value in self.pairs:
            b.set_attribute(attrs.resolve(name, "optimizer"), value)
        return b

    def __repr__(self):
        return f"OptimizerFactory({getattr(self.factory, '__name__', self.factory)!r}, {self.pairs!r})"


def optimizer_with_attributes(factory, pairs: Iterable = ()) -> OptimizerFactory:
    return OptimizerFactory(factory, pairs)


class Model:
    """An optimization model; see the module docstring for the two modes."""

    def __init__(self, optimizer=None, *, name: str = ""):
        self.id = next(_model_ids)
        self.direct = False
        self._cache = ModelData()
        self._backend: Optional[Backend] = None
        self._factory = None
        self._state = EMPTY
        self._pending: Optional[list] = []
        self._bridges = BridgeMap()
        self._optimizer_attrs: dict[str, Any] = {}
        self._callbacks: dict[CallbackKind, Callable] = {}
        self._results: Optional[SolveResults] = None
        self._in_callback = False
        if name:
            self._cache.attributes[("name", "model", None)] = name
        if optimizer is not None:
            self.set_optimizer(optimizer)

    # -- plumbing ------------------------------------------------------------------
    @property
    def data(self) -> ModelData:
        """The current model image (the cache, or the backend state in direct mode)."""
        return self._backend.data if self.direct else self._cache

    @property
    def sync_state(self) -> str:
        return self._state

    def _mutate(self, delta):
        if self._in_callback:
            raise ModelMutationInCallback("the model cannot be modified inside a callback")
        if self.direct:
            out = backend_apply(self._backend, delta)
            self._results = None
            return out
        out = self._cache.apply(delta)
        self._results = None
        self._record(delta)
        return out

    def _record(self, delta):
        if self._backend is None or self._state == EMPTY:
            return
        self._state = DIRTY
        if self._pending is None:
            return
        caps = self._backend.capabilities
        needs_bridge = isinstance(delta, AddConstraint) and not caps.supports_set(
            function_kind(delta.function), delta.set)
        limit = self._backend.data.num_constraints if hasattr(self._backend, "data") else 0
        if not caps.incremental or self._bridges.active or needs_bridge or len(self._pending) >= limit:
            self._pending = None  # full reload at the next sync
        else:
            self._pending.append(delta)

    def _check_ref(self, x: VariableRef):
        if not isinstance(x, VariableRef):
            raise TypeError(f"expected a VariableRef, got {type(x).__name__}")
        if x.model.id != self.id:
            raise MixedModels("variable belongs to a different model")
        self.data.check_variable(x.index)

    def _check_owner(self, e):
        owner = getattr(e, "owner", None)
        if owner is not None and owner != self.id:
            raise MixedModels("expression belongs to a different model")

    # -- variables -----------------------------------------------------------------
    def add_variable(self, lb: float = -math.inf, ub: float = math.inf,
                     integrality="continuous", name: str = "") -> VariableRef:
        lb, ub = float(lb), float(ub)
        if lb > ub:
            raise InvalidBounds(f"lower bound {lb} exceeds upper bound {ub}")
        kind = parse_kind(integrality)
        index = self.data.next_variable
        self._mutate(AddVariable(index, lb, ub, kind, name))
        return VariableRef(self, index)

    def add_variables(self, count: int, lb=-math.inf, ub=math.inf, integrality="continuous",
                      name: str = "") -> list[VariableRef]:
        return [self.add_variable(lb, ub, integrality, f"{name}[{k + 1}]" if name else "")
                for k in range(count)]

    def variable_name(self, x: VariableRef) -> str:
        return self.data.names[x.index]

    def set_name(self, ref, name: str) -> None:
        if isinstance(ref, VariableRef):
            self._check_ref(ref)
            self._mutate(SetName("variable", ref.index, name))
        else:
            self._mutate(SetName("constraint", ref.index, name))

    def lower_bound(self, x: VariableRef) -> float:
        self._check_ref(x)
        return self.data.lb[x.index]

    def upper_bound(self, x: VariableRef) -> float:
        self._check_ref(x)
        return self.data.ub[x.index]

    def integrality(self, x: VariableRef) -> str:
        self._check_ref(x)
        return {CONTINUOUS: "continuous", INTEGER: "integer", BINARY: "binary"}[self.data.kind[x.index]]

    def set_bounds(self, x: VariableRef, lb: float, ub: float) -> None:
        self._check_ref(x)
        if lb > ub:
            raise InvalidBounds(f"lower bound {lb} exceeds upper bound {ub}")
        self._mutate(SetBounds(x.index, float(lb), float(ub)))

    def set_integrality(self, x: VariableRef, integrality) -> None:
        self._check_ref(x)
        self._mutate(SetIntegrality(x.index, parse_kind(integrality)))

    def variables(self) -> list[VariableRef]:
        return [VariableRef(self, i) for i in self.data.live_variables()]

    @property
    def num_variables(self) -> int:
        return self.data.num_variables

    # -- constraints ---------------------------------------------------------------
    @property
    def num_constraints(self) -> int:
        return self.data.num_constraints

    def constraints(self) -> list[ConstraintRef]:
        return [ConstraintRef(self, i, e.kind) for i, e in sorted(self.data.constraints.items())]

    def _as_function(self, f):
        if isinstance(f, np.ndarray):
            f = f.tolist()
        if isinstance(f, (list, tuple)):
            if f and isinstance(f[0], (list, tuple, np.ndarray)):
                rows = tuple(tuple(self._scalar(g) for g in row) for row in f)
                if any(len(r) != len(rows) for r in rows):
                    raise ShapeMismatch("matrix functions must be square")
                return rows
            return tuple(self._scalar(g) for g in f)
        return self._scalar(f, allow_quadratic=True)

    def _scalar(self, g, allow_quadratic=False):
        e = as_expr(g)
        self._check_owner(e)
        if isinstance(e, QuadExpr):
            if not allow_quadratic:
                raise ShapeMismatch("vector and matrix functions must be affine")
            if not e.qterms or all(c == 0.0 for c in e.qterms.values()):
                e = e.affine
        e = e.canonicalize()  # also detaches the stored function from the caller's object
        if isinstance(e, QuadExpr):
            for i in e.variables():
                self.data.check_variable(i)
        else:
            for i in e.terms:
                self.data.check_variable(i)
        return e

    def add_constraint(self, f, s, name: str = ""):
        """Add ``f in s``; returns a :class:`ConstraintRef`.

        ``x in Integer()`` and ``x in Binary()`` on a single variable set its
        integrality instead and return an :class:`IntegralityRef`.
        """
        f = self._as_function(f)
        kind = function_kind(f)
        if isinstance(s, (Integer, Binary)):
            if kind != SCALAR_AFFINE or len(f.terms) != 1 or f.constant != 0.0 \
                    or next(iter(f.terms.values())) != 1.0:
                raise ShapeMismatch("integrality applies to a single variable")
            (v,) = f.terms
            new_kind = BINARY if isinstance(s, Binary) else INTEGER
            self._mutate(SetIntegrality(v, new_kind))
            return IntegralityRef(self, v, new_kind)
        if isinstance(s, SCALAR_LINEAR_SETS):
            if kind not in (SCALAR_AFFINE, SCALAR_QUADRATIC):
                raise ShapeMismatch(f"{type(s).__name__} needs a scalar function, got {kind}")
            if f.constant != 0.0:
                s = s.shifted(f.constant)
                f = f.copy()
                if isinstance(f, QuadExpr):
                    f.affine.constant = 0.0
                else:
                    f.constant = 0.0
        elif isinstance(s, Indicator):
            if kind != VECTOR_AFFINE or len(f) != 2:
                raise ShapeMismatch("indicator constraints take the vector [z, a'x]")
            z = f[0]
            if len(z.terms) != 1 or z.constant != 0.0 or next(iter(z.terms.values())) != 1.0:
                raise InvalidConstraint("the indicator must be a single variable")
            (zi,) = z.terms
            if self.data.kind[zi] != BINARY:
                raise InvalidConstraint("the indicator variable must be binary")
        elif isinstance(s, Complements):
            if kind != VECTOR_AFFINE or len(f) != 2 or len(f[1].terms) != 1:
                raise ShapeMismatch("complementarity constraints take the vector [f, x]")
        elif isinstance(s, PSDCone):
            if kind != MATRIX_AFFINE or len(f) != s.side:
                raise ShapeMismatch(f"PSDCone({s.side}) needs a {s.side}x{s.side} matrix")
            for i in range(s.side):
                for j in range(i + 1, s.side):
                    if f[i][j] != f[j][i]:
                        raise ShapeMismatch("PSDCone needs a symmetric matrix")
        elif isinstance(s, UserSet):
            reg = registered_set(s.key)
            if reg.validator is not None and not reg.validator(f, s.payload):
                raise InvalidConstraint(f"function rejected by the validator of set {s.key!r}")
        else:
            raise InvalidConstraint(f"unknown set {s!r}")
        index = self.data.next_constraint
        self._mutate(AddConstraint(index, f, s, name))
        return ConstraintRef(self, index, kind)

    def add_indicator_constraint(self, z: VariableRef, f, s, activate_on: bool = True, name: str = ""):
        """``z == activate_on  =>  f in s`` with ``s`` a LessEqual or GreaterEqual set."""
        f = self._scalar(f)
        s = s.shifted(f.constant)
        f = AffExpr(f.owner, 0.0, f.terms)
        return self.add_constraint([z, f], Indicator(s, activate_on), name)

    def add_complements_constraint(self, f, x: VariableRef, name: str = ""):
        """``f ⟂ x``: x at its lower bound needs f >= 0, at its upper bound f <= 0, else f = 0."""
        self._check_ref(x)
        if not (math.isfinite(self.data.lb[x.index]) or math.isfinite(self.data.ub[x.index])):
            raise UnboundedComplementsVariable("the complemented variable needs a finite bound")
        return self.add_constraint([f, x], Complements(), name)

    def constraint_function(self, c: ConstraintRef):
        return self.data.check_constraint(c.index).function

    def constraint_set(self, c: ConstraintRef):
        return self.data.check_constraint(c.index).set

    def is_valid(self, ref) -> bool:
        if isinstance(ref, VariableRef):
            return ref.model.id == self.id and self.data.is_alive(ref.index)
        return ref.model.id == self.id and ref.index in self.data.constraints

    def set_normalized_coefficient(self, c: ConstraintRef, x: VariableRef, coef: float) -> None:
        self.data.check_constraint(c.index)
        self._check_ref(x)
        self._mutate(ModifyCoefficient(c.index, x.index, float(coef)))

    def normalized_coefficient(self, c: ConstraintRef, x: VariableRef) -> float:
        f = self.data.check_constraint(c.index).function
        if isinstance(f, QuadExpr):
            f = f.affine
        if not isinstance(f, AffExpr):
            raise UnsupportedModification("only scalar functions have coefficients")
        return f.terms.get(x.index, 0.0)

    # -- deletion ------------------------------------------------------------------
    def delete(self, ref, cascade: bool = False) -> None:
        """Delete a variable or constraint.

        A variable still used by a constraint or the objective is refused with
        :class:`~optmodel.errors.VariableInUse` unless ``cascade`` removes its
        terms first.
        """
        if isinstance(ref, VariableRef):
            self._check_ref(ref)
            if cascade:
                self._remove_terms(ref.index)
            self._mutate(DeleteVariable(ref.index))
        elif isinstance(ref, IntegralityRef):
            self.data.check_variable(ref.variable)
            self._mutate(SetIntegrality(ref.variable, CONTINUOUS))
        elif isinstance(ref, ConstraintRef):
            if ref.model.id != self.id:
                raise MixedModels("constraint belongs to a different model")
            self._mutate(DeleteConstraint(ref.index))
        else:
            raise TypeError(f"cannot delete {type(ref).__name__}")

    def _remove_terms(self, v: int) -> None:
        data = self.data
        for index, e in sorted(data.constraints.items()):
            if v not in function_variables(e.function):
                continue
            if e.kind == SCALAR_AFFINE:
                self._mutate(ModifyCoefficient(index, v, 0.0))
            else:
                raise UnsupportedModification(
                    f"cannot cascade-delete a variable from a {e.kind} constraint")
        obj = data.objective
        if isinstance(obj, QuadExpr) and v in obj.variables() or v in obj.terms:
            new = obj.copy()
            new.terms.pop(v, None)
            if isinstance(new, QuadExpr):
                new.qterms = {k: c for k, c in new.qterms.items() if v not in k}
            self._mutate(SetObjective(data.sense, new))

    # -- objective -----------------------------------------------------------------
    def set_objective(self, sense, f) -> None:
        sense = ObjectiveSense.parse(sense)
        e = as_expr(f)
        self._check_owner(e)
        e = e.canonicalize()
        for i in (e.variables() if isinstance(e, QuadExpr) else e.terms):
            self.data.check_variable(i)
        self._mutate(SetObjective(sense, e))

    @property
    def objective_sense(self) -> ObjectiveSense:
        return self.data.sense

    def objective_function(self):
        return self.data.objective

    # -- attributes ----------------------------------------------------------------
    def _target_index(self, key, target):
        if key.scope == "variable":
            self._check_ref(target)
            return target.index
        if key.scope == "constraint":
            self.data.check_constraint(target.index)
            return target.index
        return None

    def set_attribute(self, key, value, target=None) -> None:
        key = attrs.resolve(key, "optimizer")
        value = attrs.check_value(key, value)
        if self._in_callback:
            raise ModelMutationInCallback("the model cannot be modified inside a callback")
        index = self._target_index(key, target)
        if self.direct:
            backend_apply(self._backend, SetAttribute(key, index, value))
            if key.scope != "optimizer":
                self._results = None
            return
        if key.scope == "optimizer":
            if self._backend is not None:
                self._backend.set_attribute(key, value)
            self._optimizer_attrs[key.name] = value
            return
        if self._backend is not None and key.scope != "model" \
                and not self._backend.capabilities.supports_attribute(key):
            raise UnsupportedByBackend(f"{self._backend.name} does not support attribute {key.name!r}")
        self._mutate(SetAttribute(key, index, value))

    def get_attribute(self, key, target=None):
        key = attrs.resolve(key, "optimizer")
        index = self._target_index(key, target)
        if key.scope == "optimizer":
            if self._backend is not None:
                return self._backend.get_attribute(key)
            try:
                return self._optimizer_attrs[key.name]
            except KeyError:
                raise NoOptimizerAttached(f"optimizer attribute {key.name!r} is not set") from None
        if self.direct:
            return self._backend.get_attribute(key, index)
        try:
            return self._cache.attributes[(key.name, key.scope, index)]
        except KeyError:
            raise NoResultAvailable(f"attribute {key.name!r} has no value") from None

    def set_optimizer_attribute(self, name: str, value) -> None:
        self.set_attribute(attrs.resolve(name, "optimizer"), value)

    def get_optimizer_attribute(self, name: str):
        return self.get_attribute(attrs.resolve(name, "optimizer"))

    def set_time_limit(self, seconds: float) -> None:
        self.set_optimizer_attribute("time_limit", seconds)

    # -- callbacks -----------------------------------------------------------------
    def set_callback(self, kind: CallbackKind, fn: Optional[Callable]) -> None:
        kind = CallbackKind(kind)
        wrapped = None if fn is None else self._guarded(fn)
        if self._backend is not None:
            self._backend.set_callback(kind, wrapped)
        if fn is None:
            self._callbacks.pop(kind, None)
        else:
            self._callbacks[kind] = wrapped

    def _guarded(self, fn: Callable) -> Callable:
        def call(ctx):
            self._in_callback = True
            try:
                return fn(ctx)
            finally:
                self._in_callback = False

        call.__wrapped__ = fn
        return call

    # -- backends ------------------------------------------------------------------
    def set_optimizer(self, factory) -> None:
        """Attach a new backend built by ``factory`` (caching mode only)."""
        if self.direct:
            raise SolverChangeInDirectMode("the solver of a direct-mode model cannot be changed")
        self._factory = factory
        self._backend = None
        self._state = EMPTY
        self._results = None
        self.attach_and_sync()

    def attach_and_sync(self) -> None:
        if self._factory is None:
            raise NoOptimizerAttached("no optimizer has been set")
        if self._backend is None:
            b = self._factory()
            for name, value in self._optimizer_attrs.items():
                b.set_attribute(attrs.resolve(name, "optimizer"), value)
            for kind, fn in self._callbacks.items():
                b.set_callback(kind, fn)
            self._backend = b
            self._state = EMPTY
        if self._backend.capabilities.incremental:
            self._sync()

    def _sync(self) -> None:
        b = self._backend
        if self._state == IN_SYNC:
            return
        if self._state == DIRTY and self._pending is not None:
            for delta in self._pending:
                backend_apply(b, delta)
        else:
            image, self._bridges = bridge_model(self._cache, b.capabilities, self.id)
            b.load(image)
        self._pending = []
        self._state = IN_SYNC

    def backend(self) -> Backend:
        """The attached backend object, for backend-specific operations."""
        if self._backend is None:
            raise NoOptimizerAttached("no optimizer attached")
        return self._backend

    @property
    def solver_name(self) -> str:
        return self.backend().name

    def optimizer_index(self, x: VariableRef) -> int:
        self._check_ref(x)
        b = self.backend()
        if not self.direct:
            self._sync()
        return b.optimizer_index(x.index)

    def optimize(self) -> None:
        if self._in_callback:
            raise ModelMutationInCallback("optimize cannot be called from a callback")
        if self._backend is None:
            if self._factory is None:
                raise NoOptimizerAttached("call set_optimizer before optimize")
            self.attach_and_sync()
        b = self._backend
        if not self.direct:
            self._sync()
        start = time.perf_counter()
        b.optimize()
        res = b.results()
        if not res.solve_time:
            res.solve_time = time.perf_counter() - start
        if self._bridges.aux_variables and res.solutions:
            aux = set(self._bridges.aux_variables)
            res.solutions = [({k: v for k, v in vals.items() if k not in aux}, obj)
                             for vals, obj in res.solutions]
        self._results = res
        if not self.direct and not b.capabilities.incremental:
            # one-shot backends receive the whole model again next time
            self._state = EMPTY

    # -- results -------------------------------------------------------------------
    def _res(self) -> SolveResults:
        if self._results is None:
            raise NoResultAvailable("optimize has not been called since the last modification")
        return self._results

    def _solution(self, result: int):
        res = self._res()
        if result < 1 or result > res.result_count:
            if res.result_count == 0:
                raise NoResultAvailable(f"no result available (status {res.termination})")
            raise ResultIndexOutOfRange(f"result {result} requested, {res.result_count} available")
        return res.solutions[result - 1]

    @property
    def results(self) -> SolveResults:
        return self._res()

    def termination_status(self) -> TerminationStatus:
        if self._results is None:
            return TerminationStatus.OPTIMIZE_NOT_CALLED
        return self._results.termination

    def primal_status(self, result: int = 1) -> ResultStatus:
        res = self._res()
        return res.primal_status if 1 <= result <= max(res.result_count, 1) else ResultStatus.NO_SOLUTION

    def dual_status(self) -> ResultStatus:
        return self._res().dual_status

    def result_count(self) -> int:
        return self._res().result_count

    def raw_status(self) -> str:
        return self._res().raw_status

    def solve_time(self) -> float:
        return self._res().solve_time

    def objective_value(self, result: int = 1) -> float:
        return self._solution(result)[1]

    def objective_bound(self) -> float:
        return self._res().objective_bound

    def value(self, x, result: int = 1) -> float:
        """Primal value of a variable or expression in result ``result``.

        When the termination status is DUAL_INFEASIBLE, result 1 is the
        unbounded ray.
        """
        values = self._solution(result)[0]
        if isinstance(x, VariableRef):
            self._check_ref(x)
            return values[x.index]
        e = as_expr(x)
        self._check_owner(e)
        return e.evaluate_indexed(values)

    def dual(self, c: ConstraintRef) -> float:
        res = self._res()
        self.data.check_constraint(c.index)
        if res.dual_status is ResultStatus.NO_SOLUTION or c.index not in res.duals:
            raise NoResultAvailable("no dual value available for this constraint")
        return res.duals[c.index]

    # -- diagnostics ---------------------------------------------------------------
    def compute_iis(self) -> list:
        """IIS members as ConstraintRef and BoundRef handles."""
        b = self.backend()
        if not b.capabilities.supports_iis:
            raise UnsupportedByBackend(f"{b.name} cannot compute an IIS")
        if not self.direct:
            self._sync()
        out = []
        for kind, index in b.compute_iis():
            if kind == "constraint":
                out.append(ConstraintRef(self, index, self.data.constraints[index].kind))
            else:
                out.append(BoundRef(VariableRef(self, index), kind))
        return out

    def solution_summary(self, verbose: bool = False) -> str:
        return solution_summary(self, verbose)

    def __repr__(self):
        mode = "direct" if self.direct else "caching"
        return (f"Model({mode}, {self.num_variables} variables, "
                f"{self.num_constraints} constraints)")


def direct_model(backend: Backend) -> Model:
    """A model that forwards every change straight to ``backend``."""
    if not backend.capabilities.incremental:
        raise NotIncremental(f"{backend.name} is a one-shot backend; direct mode needs an incremental one")
    m = Model()
    m.direct = True
    m._cache = None
    m._backend = backend
    m._state = IN_SYNC
    m._pending = None
    return m


def _fmt(v: float) -> str:
    return format(v, "#.5g")


def solution_summary(m: Model, verbose: bool = False) -> str:
    res = m._res()
    lines = [
        f"solver_name : {m.solver_name}",
        f"termination_status : {res.termination}",
        f"primal_status : {res.primal_status}",
        f"dual_status : {res.dual_status}",
    ]
    if res.result_count:
        lines.append(f"objective_value : {_fmt(res.solutions[0][1])}")
    lines.append(f"result_count : {res.result_count}")
    lines.append(f"solve_time : {_fmt(res.solve_time)}")
    if verbose and res.result_count:
        values = res.solutions[0][0]
        for x in m.variables():
            lines.append(f"  {x!r} : {_fmt(values[x.index])}")
    return "\n".join(lines) + "\n"


# function-style aliases
def add_variable(m: Model, lb=-math.inf, ub=math.inf, integrality="continuous", name="") -> VariableRef:
    return m.add_variable(lb, ub, integrality, name)


def add_constraint(m: Model, f, s, name: str = ""):
    return m.add_constraint(f, s, name)


def set_objective(m: Model, sense, f) -> None:
    m.set_objective(sense, f)


def optimize(m: Model) -> None:
    m.optimize()


def value(x, result: int = 1):
    return x.model.value(x, result)


def backend(m: Model) -> Backend:
    return m.backend()
