"""Constraint sets and the registry for user-defined sets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .errors import DuplicateRegistration, InvalidBounds, InvalidConstraint

__all__ = [
    "ConstraintSet",
    "LessEqual",
    "GreaterEqual",
    "EqualTo",
    "Interval",
    "Integer",
    "Binary",
    "Indicator",
    "Complements",
    "PSDCone",
    "UserSet",
    "register_set",
    "unregister_set",
    "registered_set",
    "SCALAR_LINEAR_SETS",
]


class ConstraintSet:
    """Base class; each subclass is one tag of the set union."""

    tag = "set"


@dataclass(frozen=True)
class LessEqual(ConstraintSet):
    ub: float
    tag = "LessEqual"

    def __post_init__(self):
        object.__setattr__(self, "ub", float(self.ub))

    def shifted(self, delta):
        return LessEqual(self.ub - delta)

    def contains(self, v, tol=0.0):
        return v <= self.ub + tol


@dataclass(frozen=True)
class GreaterEqual(ConstraintSet):
    lb: float
    tag = "GreaterEqual"

    def __post_init__(self):
        object.__setattr__(self, "lb", float(self.lb))

    def shifted(self, delta):
        return GreaterEqual(self.lb - delta)

    def contains(self, v, tol=0.0):
        return v >= self.lb - tol


@dataclass(frozen=True)
class EqualTo(ConstraintSet):
    rhs: float
    tag = "EqualTo"

    def __post_init__(self):
        object.__setattr__(self, "rhs", float(self.rhs))

    def shifted(self, delta):
        return EqualTo(self.rhs - delta)

    def contains(self, v, tol=0.0):
        return abs(v - self.rhs) <= tol


@dataclass(frozen=True)
class Interval(ConstraintSet):
    lb: float
    ub: float
    tag = "Interval"

    def __post_init__(self):
        object.__setattr__(self, "lb", float(self.lb))
        object.__setattr__(self, "ub", float(self.ub))
        if self.lb > self.ub:
            raise InvalidBounds(f"Interval requires lb <= ub, got [{self.lb}, {self.ub}]")

    def shifted(self, delta):
        return Interval(self.lb - delta, self.ub - delta)

    def contains(self, v, tol=0.0):
        return self.lb - tol <= v <= self.ub + tol


@dataclass(frozen=True)
class Integer(ConstraintSet):
    tag = "Integer"


@dataclass(frozen=True)
class Binary(ConstraintSet):
    tag = "Binary"


@dataclass(frozen=True)
class Indicator(ConstraintSet):
    """``z == activate_on  =>  inner`` for the function ``[z, a'x]``."""

    inner: LessEqual | GreaterEqual
    activate_on: bool = True
    tag = "Indicator"

    def __post_init__(self):
        if not isinstance(self.inner, (LessEqual, GreaterEqual)):
            raise InvalidConstraint("Indicator inner set must be LessEqual or GreaterEqual")


@dataclass(frozen=True)
class Complements(ConstraintSet):
    """Pairs a function ``f`` with a variable ``x`` as the vector ``[f, x]``."""

    tag = "Complements"


@dataclass(frozen=True)
class PSDCone(ConstraintSet):
    side: int
    tag = "PSDCone"


@dataclass(frozen=True)
class UserSet(ConstraintSet):
    key: str
    payload: Any = None
    tag = "UserRegistered"


SCALAR_LINEAR_SETS = (LessEqual, GreaterEqual, EqualTo, Interval)


def set_bounds(s) -> tuple[float, float]:
    """Lower and upper limits of a scalar linear set."""
    if isinstance(s, LessEqual):
        return -math.inf, s.ub
    if isinstance(s, GreaterEqual):
        return s.lb, math.inf
    if isinstance(s, EqualTo):
        return s.rhs, s.rhs
    if isinstance(s, Interval):
        return s.lb, s.ub
    raise TypeError(f"{type(s).__name__} is not a scalar linear set")


@dataclass
class RegisteredSet:
    key: str
    validator: Optional[Callable] = None
    bridge: Optional[Callable] = None
    contains: Optional[Callable] = None
    extra: dict = field(default_factory=dict)


_SET_REGISTRY: dict[str, RegisteredSet] = {}


def register_set(key: str, validator: Optional[Callable] = None,
                 bridge: Optional[Callable] = None, contains: Optional[Callable] = None) -> None:
    """Register a user-defined set usable as ``UserSet(key, payload)``.

    ``validator(function, payload)`` is called by ``add_constraint`` and must
    return true for acceptable functions.  ``bridge(function, payload, builder)``
    rewrites the constraint for backends that do not support it natively, using
    ``builder.add_variable`` / ``builder.add_constraint``.  ``contains(value,
    payload)`` is an optional membership test used by feasibility checks.
    """
    if key in _SET_REGISTRY:
        raise DuplicateRegistration(f"set {key!r} is already registered")
    _SET_REGISTRY[key] = RegisteredSet(key, validator, bridge, contains)


def unregister_set(key: str) -> None:
    _SET_REGISTRY.pop(key, None)


def registered_set(key: str) -> RegisteredSet:
    try:
        return _SET_REGISTRY[key]
    except KeyError:
        raise InvalidConstraint(f"set {key!r} is not registered") from None
