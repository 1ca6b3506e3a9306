"""Index-based model storage shared by the modeling layer and the backends.

:class:`ModelData` is the "full model image": the caching mode keeps one as
its cache and every reference backend keeps one as its internal state.  All
mutations are expressed as small delta records so that replaying the deltas
and loading a snapshot lead to the same state (compared with
:meth:`ModelData.digest`).

Stored functions are never mutated in place; modifications swap in a new
object, which lets snapshots share expression objects safely.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Any

from .errors import StaleReference, UnsupportedModification, VariableInUse
from .expr import AffExpr, QuadExpr
from .sets import (
    Binary,
    Complements,
    EqualTo,
    GreaterEqual,
    Indicator,
    Integer,
    Interval,
    LessEqual,
    PSDCone,
    UserSet,
    registered_set,
)
from .status import ObjectiveSense

CONTINUOUS, INTEGER, BINARY = "C", "I", "B"
_KIND_ALIASES = {
    "continuous": CONTINUOUS, "C": CONTINUOUS,
    "integer": INTEGER, "I": INTEGER, "int": INTEGER,
    "binary": BINARY, "B": BINARY, "bin": BINARY,
}

SCALAR_AFFINE = "scalar-affine"
SCALAR_QUADRATIC = "scalar-quadratic"
VECTOR_AFFINE = "vector-affine"
MATRIX_AFFINE = "matrix-affine"


def parse_kind(kind) -> str:
    try:
        return _KIND_ALIASES[kind]
    except KeyError:
        raise ValueError(f"unknown integrality {kind!r}") from None


def function_kind(f) -> str:
    if isinstance(f, AffExpr):
        return SCALAR_AFFINE
    if isinstance(f, QuadExpr):
        return SCALAR_QUADRATIC
    if isinstance(f, tuple) and f and isinstance(f[0], tuple):
        return MATRIX_AFFINE
    if isinstance(f, tuple):
        return VECTOR_AFFINE
    raise TypeError(f"unsupported constraint function {type(f).__name__}")


def function_variables(f) -> set:
    kind = function_kind(f)
    if kind == SCALAR_AFFINE:
        return set(f.terms)
    if kind == SCALAR_QUADRATIC:
        return f.variables()
    if kind == VECTOR_AFFINE:
        return set().union(*(set(g.terms) for g in f))
    return set().union(*(set(g.terms) for row in f for g in row))


class ConstraintEntry:
    __slots__ = ("function", "set", "name", "kind")

    def __init__(self, function, set_, name: str = "", kind: str | None = None):
        self.function = function
        self.set = set_
        self.name = name
        self.kind = function_kind(function) if kind is None else kind

    def __repr__(self):
        return f"ConstraintEntry({self.function!r}, {self.set!r}, name={self.name!r})"


# -- deltas -----------------------------------------------------------------

@dataclass
class AddVariable:
    index: int
    lb: float = -math.inf
    ub: float = math.inf
    kind: str = CONTINUOUS
    name: str = ""


@dataclass
class AddConstraint:
    index: int
    function: Any
    set: Any
    name: str = ""


@dataclass
class DeleteVariable:
    index: int


@dataclass
class DeleteConstraint:
    index: int


@dataclass
class ModifyCoefficient:
    constraint: int
    variable: int
    coefficient: float


@dataclass
class SetBounds:
    variable: int
    lb: float
    ub: float


@dataclass
class SetIntegrality:
    variable: int
    kind: str


@dataclass
class SetObjective:
    sense: ObjectiveSense
    function: Any


@dataclass
class SetAttribute:
    key: Any
    target: int | None
    value: Any


@dataclass
class SetName:
    scope: str
    index: int
    name: str


class ModelData:
    """Variables, constraints and objective addressed by dense indices."""

    def __init__(self):
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.kind: list[str] = []
        self.names: list[str] = []
        self.alive: list[bool] = []
        self.num_variables = 0
        self.constraints: dict[int, ConstraintEntry] = {}
        self.next_constraint = 0
        self.sense = ObjectiveSense.MIN
        self.objective: AffExpr | QuadExpr = AffExpr()
        self.attributes: dict = {}

    # -- copying -----------------------------------------------------------
    def copy(self) -> "ModelData":
        d = ModelData.__new__(ModelData)
        d.lb = list(self.lb)
        d.ub = list(self.ub)
        d.kind = list(self.kind)
        d.names = list(self.names)
        d.alive = list(self.alive)
        d.num_variables = self.num_variables
        d.constraints = dict(self.constraints)
        d.next_constraint = self.next_constraint
        d.sense = self.sense
        d.objective = self.objective
        d.attributes = dict(self.attributes)
        return d

    # -- queries -----------------------------------------------------------
    @property
    def next_variable(self) -> int:
        return len(self.lb)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def is_alive(self, index: int) -> bool:
        return 0 <= index < len(self.alive) and self.alive[index]

    def check_variable(self, index: int) -> None:
        if not (0 <= index < len(self.alive) and self.alive[index]):
            raise StaleReference(f"variable index {index} is not live")

    def check_constraint(self, index: int) -> ConstraintEntry:
        try:
            return self.constraints[index]
        except KeyError:
            raise StaleReference(f"constraint index {index} is not live") from None

    def live_variables(self) -> list[int]:
        return [i for i, a in enumerate(self.alive) if a]

    def is_linear(self) -> bool:
        if isinstance(self.objective, QuadExpr) and self.objective.qterms:
            return False
        return all(e.kind != SCALAR_QUADRATIC for e in self.constraints.values())

    def has_integers(self) -> bool:
        return any(k != CONTINUOUS for k, a in zip(self.kind, self.alive) if a)

    def variable_in_use(self, index: int) -> bool:
        obj = self.objective
        if index in obj.terms:
            return True
        if isinstance(obj, QuadExpr) and index in obj.variables():
            return True
        return any(index in function_variables(e.function) for e in self.constraints.values())

    # -- mutation ------------------------------------------------------------
    def add_variable(self, lb=-math.inf, ub=math.inf, kind=CONTINUOUS, name="") -> int:
        index = len(self.lb)
        self.lb.append(lb)
        self.ub.append(ub)
        self.kind.append(kind)
        self.names.append(name)
        self.alive.append(True)
        self.num_variables += 1
        return index

    def add_constraint(self, function, set_, name="", index=None) -> int:
        if index is None:
            index = self.next_constraint
        self.constraints[index] = ConstraintEntry(function, set_, name)
        self.next_constraint = max(self.next_constraint, index + 1)
        return index

    def apply(self, delta) -> int | None:
        handler = _HANDLERS[type(delta)]
        return handler(self, delta)

    def _apply_add_variable(self, d: AddVariable):
        if d.index != len(self.lb):
            raise StaleReference(f"variable index {d.index} out of sequence (next is {len(self.lb)})")
        return self.add_variable(d.lb, d.ub, d.kind, d.name)

    def _apply_add_constraint(self, d: AddConstraint):
        if d.index in self.constraints or d.index < self.next_constraint:
            raise StaleReference(f"constraint index {d.index} out of sequence")
        return self.add_constraint(d.function, d.set, d.name, d.index)

    def _apply_delete_variable(self, d: DeleteVariable):
        self.check_variable(d.index)
        if self.variable_in_use(d.index):
            raise VariableInUse(f"variable index {d.index} is still referenced")
        self.alive[d.index] = False
        self.num_variables -= 1
        for key in [k for k in self.attributes if k[1] == "variable" and k[2] == d.index]:
            del self.attributes[key]

    def _apply_delete_constraint(self, d: DeleteConstraint):
        self.check_constraint(d.index)
        del self.constraints[d.index]
        for key in [k for k in self.attributes if k[1] == "constraint" and k[2] == d.index]:
            del self.attributes[key]

    def _apply_modify(self, d: ModifyCoefficient):
        entry = self.check_constraint(d.constraint)
        self.check_variable(d.variable)
        f = entry.function
        if entry.kind == SCALAR_AFFINE:
            new = f.copy()
            _set_coef(new.terms, d.variable, d.coefficient)
        elif entry.kind == SCALAR_QUADRATIC:
            new = f.copy()
            _set_coef(new.affine.terms, d.variable, d.coefficient)
        else:
            raise UnsupportedModification(f"cannot modify coefficients of a {entry.kind} constraint")
        self.constraints[d.constraint] = ConstraintEntry(new, entry.set, entry.name, entry.kind)

    def _apply_set_bounds(self, d: SetBounds):
        self.check_variable(d.variable)
        self.lb[d.variable] = d.lb
        self.ub[d.variable] = d.ub

    def _apply_set_integrality(self, d: SetIntegrality):
        self.check_variable(d.variable)
        self.kind[d.variable] = d.kind

    def _apply_set_objective(self, d: SetObjective):
        self.sense = d.sense
        self.objective = d.function

    def _apply_set_attribute(self, d: SetAttribute):
        self.attributes[(d.key.name, d.key.scope, d.target)] = d.value

    def _apply_set_name(self, d: SetName):
        if d.scope == "variable":
            self.check_variable(d.index)
            self.names[d.index] = d.name
        else:
            self.check_constraint(d.index).name = d.name

    # -- canonical form ----------------------------------------------------------
    def canonical_text(self) -> str:
        """Deterministic rendering independent of index gaps and names."""
        live = self.live_variables()
        pos = {v: p for p, v in enumerate(live)}
        lines = [f"sense {self.sense.name}"]
        for p, v in enumerate(live):
            lines.append(f"var {p} {self.lb[v]!r} {self.ub[v]!r} {self.kind[v]}")
        for p, (_, e) in enumerate(sorted(self.constraints.items())):
            lines.append(f"con {p} {e.kind} {_render_function(e.function, pos)} in {_render_set(e.set)}")
        lines.append(f"obj {_render_function(self.objective, pos)}")
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()

    # -- feasibility ------------------------------------------------------------
    def violations(self, values, tol: float = 1e-6, extra=()) -> list[str]:
        """Describe every bound, integrality or constraint violated by ``values``.

        ``values`` is indexable by variable index.  ``extra`` holds additional
        ``(function, set)`` pairs (lazy constraints, for instance).
        """
        out = []
        for v in self.live_variables():
            x = values[v]
            if x < self.lb[v] - tol or x > self.ub[v] + tol:
                out.append(f"variable {v} = {x} outside [{self.lb[v]}, {self.ub[v]}]")
            if self.kind[v] != CONTINUOUS:
                if abs(x - round(x)) > tol:
                    out.append(f"variable {v} = {x} not integral")
                if self.kind[v] == BINARY and not (-tol <= x <= 1 + tol):
                    out.append(f"variable {v} = {x} not binary")
        items = [(f"constraint {i}", e.function, e.set) for i, e in sorted(self.constraints.items())]
        items += [(f"extra {k}", f, s) for k, (f, s) in enumerate(extra)]
        for label, f, s in items:
            if not set_satisfied(f, s, values, tol, self):
                out.append(f"{label} violated")
        return out

    def is_feasible(self, values, tol: float = 1e-6, extra=()) -> bool:
        return not self.violations(values, tol, extra)


def _set_coef(terms: dict, index: int, coef: float) -> None:
    if coef == 0.0:
        terms.pop(index, None)
    elif index in terms:
        terms[index] = float(coef)
    else:
        terms[index] = float(coef)
        # keep keys sorted so the function stays canonical
        items = sorted(terms.items())
        terms.clear()
        terms.update(items)


def set_satisfied(f, s, values, tol, data: ModelData | None = None) -> bool:
    if isinstance(s, (LessEqual, GreaterEqual, EqualTo, Interval)):
        return s.contains(f.evaluate_indexed(values), tol)
    if isinstance(s, Indicator):
        z, g = f
        zv = z.evaluate_indexed(values)
        active = zv > 0.5 if s.activate_on else zv < 0.5
        return (not active) or s.inner.contains(g.evaluate_indexed(values), tol)
    if isinstance(s, Complements):
        g, xe = f
        (xi,) = xe.terms
        fv = g.evaluate_indexed(values)
        xv = values[xi]
        lo = data.lb[xi] if data is not None else -math.inf
        hi = data.ub[xi] if data is not None else math.inf
        return complements_satisfied(fv, xv, lo, hi, tol)
    if isinstance(s, (Integer, Binary)):
        v = f.evaluate_indexed(values)
        ok = abs(v - round(v)) <= tol
        return ok and (not isinstance(s, Binary) or -tol <= v <= 1 + tol)
    if isinstance(s, UserSet):
        reg = registered_set(s.key)
        if reg.contains is None:
            raise UnsupportedModification(f"set {s.key!r} has no membership test")
        fv = f.evaluate_indexed(values) if isinstance(f, (AffExpr, QuadExpr)) else [
            g.evaluate_indexed(values) for g in f
        ]
        return bool(reg.contains(fv, s.payload))
    if isinstance(s, PSDCone):
        import numpy as np

        mat = np.array([[g.evaluate_indexed(values) for g in row] for row in f])
        return bool(np.linalg.eigvalsh((mat + mat.T) / 2).min() >= -tol)
    raise TypeError(f"cannot check membership in {type(s).__name__}")


def complements_satisfied(fv, xv, lo, hi, tol) -> bool:
    """``f ⟂ x``: at lower bound f >= 0, at upper bound f <= 0, otherwise f = 0."""
    at_lo = math.isfinite(lo) and abs(xv - lo) <= tol
    at_hi = math.isfinite(hi) and abs(xv - hi) <= tol
    if xv < lo - tol or xv > hi + tol:
        return False
    if at_lo and fv >= -tol:
        return True
    if at_hi and fv <= tol:
        return True
    return abs(fv) <= tol


def _render_affine(e: AffExpr, pos) -> str:
    terms = sorted((pos[i], c) for i, c in e.terms.items() if c != 0.0)
    body = ",".join(f"{p}:{c!r}" for p, c in terms)
    return f"{e.constant!r}[{body}]"


def _render_function(f, pos) -> str:
    if isinstance(f, AffExpr):
        return _render_affine(f, pos)
    if isinstance(f, QuadExpr):
        q = []
        for (i, j), c in f.qterms.items():
            if c == 0.0:
                continue
            a, b = sorted((pos[i], pos[j]))
            q.append((a, b, c))
        body = ",".join(f"{a}*{b}:{c!r}" for a, b, c in sorted(q))
        return f"{_render_affine(f.affine, pos)}+q[{body}]"
    if isinstance(f, tuple) and f and isinstance(f[0], tuple):
        return "M(" + ";".join(",".join(_render_affine(g, pos) for g in row) for row in f) + ")"
    return "V(" + ",".join(_render_affine(g, pos) for g in f) + ")"


def _render_set(s) -> str:
    if isinstance(s, UserSet):
        return f"UserRegistered({s.key!r},{s.payload!r})"
    if isinstance(s, Indicator):
        return f"Indicator({s.activate_on},{_render_set(s.inner)})"
    fields = getattr(s, "__dataclass_fields__", {})
    args = ",".join(repr(getattr(s, k)) for k in fields)
    return f"{type(s).__name__}({args})"


_HANDLERS = {
    AddVariable: ModelData._apply_add_variable,
    AddConstraint: ModelData._apply_add_constraint,
    DeleteVariable: ModelData._apply_delete_variable,
    DeleteConstraint: ModelData._apply_delete_constraint,
    ModifyCoefficient: ModelData._apply_modify,
    SetBounds: ModelData._apply_set_bounds,
    SetIntegrality: ModelData._apply_set_integrality,
    SetObjective: ModelData._apply_set_objective,
    SetAttribute: ModelData._apply_set_attribute,
    SetName: ModelData._apply_set_name,
}
