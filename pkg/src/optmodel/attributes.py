"""Attribute keys, the built-in catalogue and user registration."""
from __future__ import annotations

import numbers
from dataclasses import dataclass
from typing import Any

from .errors import DuplicateRegistration, TypeMismatch, UnknownAttribute

SCOPES = ("optimizer", "model", "variable", "constraint")


@dataclass(frozen=True)
class AttributeKey:
    scope: str
    name: str
    payload: type | None = None

    def __post_init__(self):
        if self.scope not in SCOPES:
            raise ValueError(f"attribute scope must be one of {SCOPES}, got {self.scope!r}")

    @property
    def ident(self) -> tuple[str, str]:
        return self.scope, self.name


def OptimizerAttribute(name, payload=None):
    return AttributeKey("optimizer", name, payload)


def VariableAttribute(name, payload=None):
    return AttributeKey("variable", name, payload)


def ConstraintAttribute(name, payload=None):
    return AttributeKey("constraint", name, payload)


def ModelAttribute(name, payload=None):
    return AttributeKey("model", name, payload)


BUILTIN_ATTRIBUTES = [
    OptimizerAttribute("time_limit", float),
    OptimizerAttribute("iteration_limit", int),
    OptimizerAttribute("node_limit", int),
    OptimizerAttribute("gap_tol", float),
    OptimizerAttribute("verbose", bool),
    OptimizerAttribute("tol", float),
    OptimizerAttribute("max_iter", int),
    ModelAttribute("name", str),
    VariableAttribute("branch_priority", float),
    VariableAttribute("start", float),
]

_REGISTRY: dict[tuple[str, str], AttributeKey] = {k.ident: k for k in BUILTIN_ATTRIBUTES}
_BUILTIN = frozenset(_REGISTRY)


def register_attribute(key: AttributeKey, payload: type | None = None) -> AttributeKey:
    """Make ``key`` usable with ``set_attribute``/``get_attribute``."""
    if payload is not None:
        key = AttributeKey(key.scope, key.name, payload)
    if key.ident in _REGISTRY:
        raise DuplicateRegistration(f"attribute {key.scope}/{key.name} is already registered")
    _REGISTRY[key.ident] = key
    return key


def unregister_attribute(key: AttributeKey) -> None:
    if key.ident in _BUILTIN:
        raise ValueError("built-in attributes cannot be unregistered")
    _REGISTRY.pop(key.ident, None)


def resolve(key, scope: str = "optimizer") -> AttributeKey:
    """Return the registered key for ``key`` (an AttributeKey or a bare name)."""
    if isinstance(key, str):
        ident = (scope, key)
    else:
        ident = key.ident
    try:
        return _REGISTRY[ident]
    except KeyError:
        raise UnknownAttribute(f"unknown {ident[0]} attribute {ident[1]!r}") from None


def check_value(key: AttributeKey, value: Any) -> Any:
    """Validate ``value`` against the key's payload token; ints widen to float."""
    token = key.payload
    if token is None:
        return value
    if token is float:
        if isinstance(value, numbers.Real) and not isinstance(value, bool):
            return float(value)
    elif token is int:
        if isinstance(value, numbers.Integral) and not isinstance(value, bool):
            return int(value)
    elif isinstance(value, token):
        return value
    raise TypeMismatch(
        f"attribute {key.name!r} expects {token.__name__}, got {type(value).__name__}"
    )
