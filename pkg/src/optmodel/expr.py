"""Variable references and sparse affine / quadratic expressions.

Expressions store their terms in an insertion-ordered ``dict`` keyed by the
integer variable index, so duplicate variables fold on insert and appending a
term is O(1).  Zero coefficients are kept while building and only removed by
:meth:`AffExpr.canonicalize` / :meth:`QuadExpr.canonicalize`, which also sort
the keys.

Every expression remembers the identity of the model that owns its variables
(``owner``); combining expressions from two different models raises
:class:`~optmodel.errors.MixedModels`.  Constant-only expressions have
``owner = None`` and combine with anything.

The binary operators (``+``, ``-``, ``*``) return new objects and leave their
operands untouched.  The in-place forms (``+=``, ``-=``) and
:meth:`AffExpr.add_term` mutate the left operand; use them (or
:func:`quicksum`) to accumulate long sums in linear time.
"""
from __future__ import annotations

import numbers
from typing import Iterable, Mapping, Optional

from .errors import MissingValue, MixedModels

__all__ = [
    "VariableRef",
    "AffExpr",
    "QuadExpr",
    "aff_add",
    "aff_scale",
    "aff_mul",
    "evaluate",
    "quicksum",
    "as_expr",
]

_Number = numbers.Real


def _merge_owner(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None or a == b:
        return a
    raise MixedModels(f"expression mixes variables of models {a} and {b}")


class VariableRef:
    """Handle to a decision variable: the owning model plus a dense index."""

    __slots__ = ("model", "index")

    def __init__(self, model, index: int):
        self.model = model
        self.index = index

    @property
    def model_id(self) -> int:
        return self.model.id

    @property
    def name(self) -> str:
        return self.model.variable_name(self)

    def value(self, result: int = 1) -> float:
        return self.model.value(self, result)

    def __repr__(self):
        try:
            name = self.model.variable_name(self)
        except Exception:
            name = ""
        return name or f"_[{self.index}]"

    def __hash__(self):
        return hash((self.model.id, self.index))

    def __eq__(self, other):
        return (
            isinstance(other, VariableRef)
            and other.index == self.index
            and other.model.id == self.model.id
        )

    def __ne__(self, other):
        return not self.__eq__(other)

    # arithmetic: promote to AffExpr
    def _aff(self) -> "AffExpr":
        return AffExpr(self.model.id, 0.0, {self.index: 1.0})

    def __pos__(self):
        return self._aff()

    def __neg__(self):
        return AffExpr(self.model.id, 0.0, {self.index: -1.0})

    def __add__(self, other):
        return self._aff().__iadd__(other)

    def __radd__(self, other):
        return self._aff().__iadd__(other)

    def __sub__(self, other):
        return self._aff().__isub__(other)

    def __rsub__(self, other):
        return (-self).__iadd__(other)

    def __mul__(self, other):
        if isinstance(other, _Number):
            return AffExpr(self.model.id, 0.0, {self.index: float(other)})
        return self._aff() * other

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if not isinstance(other, _Number):
            return NotImplemented
        return AffExpr(self.model.id, 0.0, {self.index: 1.0 / float(other)})

    def __pow__(self, power):
        if power == 2:
            return self._aff() * self._aff()
        if power == 1:
            return self._aff()
        return NotImplemented


class AffExpr:
    """``constant + sum(coef * x[index])``."""

    __slots__ = ("owner", "constant", "terms")

    def __init__(self, owner: Optional[int] = None, constant: float = 0.0, terms: Optional[dict] = None):
        self.owner = owner
        self.constant = float(constant)
        self.terms = {} if terms is None else terms

    @classmethod
    def build(cls, pairs: Iterable, constant: float = 0.0) -> "AffExpr":
        """Build from ``(VariableRef, coefficient)`` pairs, folding duplicates."""
        e = cls(None, constant)
        for v, c in pairs:
            e.add_term(v, c)
        return e

    def copy(self) -> "AffExpr":
        return AffExpr(self.owner, self.constant, dict(self.terms))

    def add_term(self, v: VariableRef, coef: float) -> "AffExpr":
        owner = v.model.id
        if self.owner != owner:
            self.owner = _merge_owner(self.owner, owner)
        t = self.terms
        i = v.index
        t[i] = t.get(i, 0.0) + coef
        return self

    def canonicalize(self) -> "AffExpr":
        terms = {i: c for i, c in sorted(self.terms.items()) if c != 0.0}
        return AffExpr(self.owner if terms else None, self.constant, terms)

    def is_canonical(self) -> bool:
        keys = list(self.terms)
        return all(c != 0.0 for c in self.terms.values()) and keys == sorted(keys)

    def coefficient(self, v) -> float:
        index = v.index if isinstance(v, VariableRef) else v
        return self.terms.get(index, 0.0)

    def evaluate_indexed(self, values) -> float:
        """Evaluate with ``values[index]`` (a sequence or a mapping)."""
        total = self.constant
        try:
            for i, c in self.terms.items():
                total += c * values[i]
        except (KeyError, IndexError):
            raise MissingValue(f"no value for variable index {i}") from None
        return total

    def __repr__(self):
        parts = [f"{c:+g}*x[{i}]" for i, c in self.terms.items()]
        if self.constant or not parts:
            parts.append(f"{self.constant:+g}")
        return "AffExpr(" + " ".join(parts) + ")"

    def __eq__(self, other):
        if not isinstance(other, AffExpr):
            return NotImplemented
        return (
            self.constant == other.constant
            and list(self.terms.items()) == list(other.terms.items())
            and (self.owner == other.owner or not self.terms)
        )

    __hash__ = None

    # in-place accumulation
    def __iadd__(self, other):
        if isinstance(other, _Number):
            self.constant += other
        elif isinstance(other, VariableRef):
            self.add_term(other, 1.0)
        elif isinstance(other, AffExpr):
            self.owner = _merge_owner(self.owner, other.owner)
            self.constant += other.constant
            t = self.terms
            for i, c in other.terms.items():
                t[i] = t.get(i, 0.0) + c
        elif isinstance(other, QuadExpr):
            q = QuadExpr(AffExpr(self.owner, self.constant, self.terms))
            return q.__iadd__(other)
        else:
            return NotImplemented
        return self

    def __isub__(self, other):
        if isinstance(other, _Number):
            self.constant -= other
        elif isinstance(other, VariableRef):
            self.add_term(other, -1.0)
        elif isinstance(other, AffExpr):
            self.owner = _merge_owner(self.owner, other.owner)
            self.constant -= other.constant
            t = self.terms
            for i, c in other.terms.items():
                t[i] = t.get(i, 0.0) - c
        elif isinstance(other, QuadExpr):
            return self.__iadd__(-other)
        else:
            return NotImplemented
        return self

    # value semantics
    def __pos__(self):
        return self.copy()

    def __neg__(self):
        return aff_scale(-1.0, self)

    def __add__(self, other):
        return self.copy().__iadd__(other)

    def __radd__(self, other):
        return self.copy().__iadd__(other)

    def __sub__(self, other):
        return self.copy().__isub__(other)

    def __rsub__(self, other):
        return (-self).__iadd__(other)

    def __mul__(self, other):
        if isinstance(other, _Number):
            return aff_scale(other, self)
        if isinstance(other, VariableRef):
            return aff_mul(self, other._aff())
        if isinstance(other, AffExpr):
            return aff_mul(self, other)
        return NotImplemented

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if not isinstance(other, _Number):
            return NotImplemented
        return aff_scale(1.0 / other, self)

    def __pow__(self, power):
        if power == 2:
            return aff_mul(self, self)
        if power == 1:
            return self.copy()
        return NotImplemented


class QuadExpr:
    """``affine + sum(coef * x[i] * x[j])`` with keys stored as ``(i, j)``, ``i <= j``."""

    __slots__ = ("affine", "qterms")

    def __init__(self, affine: Optional[AffExpr] = None, qterms: Optional[dict] = None):
        self.affine = AffExpr() if affine is None else affine
        self.qterms = {} if qterms is None else qterms

    @property
    def owner(self):
        return self.affine.owner

    @property
    def constant(self):
        return self.affine.constant

    @property
    def terms(self):
        return self.affine.terms

    def copy(self) -> "QuadExpr":
        return QuadExpr(self.affine.copy(), dict(self.qterms))

    def add_quad_term(self, u: VariableRef, v: VariableRef, coef: float) -> "QuadExpr":
        self.affine.owner = _merge_owner(self.affine.owner, u.model.id)
        self.affine.owner = _merge_owner(self.affine.owner, v.model.id)
        i, j = u.index, v.index
        key = (i, j) if i <= j else (j, i)
        self.qterms[key] = self.qterms.get(key, 0.0) + coef
        return self

    def canonicalize(self) -> "QuadExpr":
        aff = self.affine.canonicalize()
        q = {k: c for k, c in sorted(self.qterms.items()) if c != 0.0}
        if q and aff.owner is None:
            aff.owner = self.affine.owner
        return QuadExpr(aff, q)

    def evaluate_indexed(self, values) -> float:
        total = self.affine.evaluate_indexed(values)
        try:
            for (i, j), c in self.qterms.items():
                total += c * values[i] * values[j]
        except (KeyError, IndexError):
            raise MissingValue(f"no value for variable index {i} or {j}") from None
        return total

    def variables(self) -> set:
        out = set(self.affine.terms)
        for i, j in self.qterms:
            out.add(i)
            out.add(j)
        return out

    def __repr__(self):
        parts = [f"{c:+g}*x[{i}]*x[{j}]" for (i, j), c in self.qterms.items()]
        return "QuadExpr(" + " ".join(parts) + f" {self.affine!r})"

    def __eq__(self, other):
        if not isinstance(other, QuadExpr):
            return NotImplemented
        return self.affine == other.affine and list(self.qterms.items()) == list(other.qterms.items())

    __hash__ = None

    def __iadd__(self, other):
        if isinstance(other, QuadExpr):
            self.affine.__iadd__(other.affine)
            q = self.qterms
            for k, c in other.qterms.items():
                q[k] = q.get(k, 0.0) + c
            return self
        r = self.affine.__iadd__(other)
        if r is NotImplemented:
            return NotImplemented
        return self

    def __isub__(self, other):
        if isinstance(other, QuadExpr):
            return self.__iadd__(-other)
        r = self.affine.__isub__(other)
        if r is NotImplemented:
            return NotImplemented
        return self

    def __pos__(self):
        return self.copy()

    def __neg__(self):
        return self * -1.0

    def __add__(self, other):
        return self.copy().__iadd__(other)

    def __radd__(self, other):
        return self.copy().__iadd__(other)

    def __sub__(self, other):
        return self.copy().__isub__(other)

    def __rsub__(self, other):
        return (-self).__iadd__(other)

    def __mul__(self, other):
        if not isinstance(other, _Number):
            return NotImplemented
        c = float(other)
        return QuadExpr(aff_scale(c, self.affine), {k: c * v for k, v in self.qterms.items()})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if not isinstance(other, _Number):
            return NotImplemented
        return self * (1.0 / other)


def as_expr(x) -> AffExpr | QuadExpr:
    """Promote a number, variable or expression to an expression object."""
    if isinstance(x, (AffExpr, QuadExpr)):
        return x
    if isinstance(x, VariableRef):
        return x._aff()
    if isinstance(x, _Number):
        return AffExpr(None, float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to an expression")


def aff_add(a: AffExpr, b: AffExpr) -> AffExpr:
    return a.copy().__iadd__(b)


def aff_scale(c: float, a: AffExpr) -> AffExpr:
    c = float(c)
    return AffExpr(a.owner, c * a.constant, {i: c * v for i, v in a.terms.items()})


def aff_mul(a: AffExpr, b: AffExpr) -> QuadExpr:
    """Exact product of two affine expressions.

    ``(a0 + sum ai xi)(b0 + sum bj xj) = a0 b0 + a0 sum bj xj + b0 sum ai xi
    + sum_ij ai bj xi xj``; the cross terms ``(i, j)`` and ``(j, i)`` fold into
    one canonical key.
    """
    owner = _merge_owner(a.owner, b.owner)
    a0, b0 = a.constant, b.constant
    terms: dict = {}
    if b0 != 0.0:
        for i, c in a.terms.items():
            terms[i] = terms.get(i, 0.0) + b0 * c
    if a0 != 0.0:
        for i, c in b.terms.items():
            terms[i] = terms.get(i, 0.0) + a0 * c
    q: dict = {}
    for i, ci in a.terms.items():
        for j, cj in b.terms.items():
            key = (i, j) if i <= j else (j, i)
            q[key] = q.get(key, 0.0) + ci * cj
    return QuadExpr(AffExpr(owner, a0 * b0, terms), q)


def evaluate(e, assignment: Mapping) -> float:
    """Evaluate ``e`` at ``assignment`` (a mapping ``VariableRef -> value``)."""
    e = as_expr(e)
    by_index = {}
    for v, val in assignment.items():
        if isinstance(v, VariableRef):
            if e.owner is not None and v.model.id != e.owner:
                continue
            by_index[v.index] = val
        else:
            by_index[v] = val
    try:
        return e.evaluate_indexed(by_index)
    except MissingValue:
        needed = e.variables() if isinstance(e, QuadExpr) else set(e.terms)
        missing = sorted(needed - set(by_index))
        raise MissingValue(f"assignment has no value for variable index {missing[0]}") from None


def quicksum(items: Iterable) -> AffExpr | QuadExpr:
    """Sum numbers, variables and expressions in linear time."""
    acc = AffExpr()
    for item in items:
        acc = acc.__iadd__(item)
        if acc is NotImplemented:
            raise TypeError(f"cannot add {type(item).__name__} to an expression")
    return acc
