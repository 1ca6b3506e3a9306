"""Constraint bridges: rewrites applied by the caching mode for backends that
do not support a constraint natively.

A bridged image is built from the cached :class:`~optmodel.data.ModelData`:
unsupported constraints are removed and replaced by supported ones, and any
auxiliary variables get indices at or above the cache's ``next_variable`` so
that every model index keeps its meaning in the image.  Auxiliary values are
dropped when results are mapped back.

Big-M constants always come from interval arithmetic over variable bounds; an
infinite bound where a finite one is needed raises instead of guessing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .backend import BackendCapabilities
from .data import (
    BINARY,
    CONTINUOUS,
    INTEGER,
    SCALAR_AFFINE,
    ModelData,
    function_kind,
)
from .errors import (
    UnboundedComplementsBigM,
    UnboundedIndicatorBigM,
    UnsupportedConstraint,
)
from .expr import AffExpr, VariableRef, as_expr
from .sets import (
    Binary,
    Complements,
    GreaterEqual,
    Indicator,
    Integer,
    Interval,
    LessEqual,
    UserSet,
    registered_set,
)

MAX_CHAIN = 2


def affine_range(f: AffExpr, data: ModelData) -> tuple[float, float, list]:
    """Interval bounds of ``f`` over the variable box, plus variables that make them infinite."""
    lo = hi = f.constant
    unbounded_lo, unbounded_hi = [], []
    for v, a in f.terms.items():
        if a == 0.0:
            continue
        vl, vu = data.lb[v], data.ub[v]
        if data.kind[v] == BINARY:
            vl, vu = max(vl, 0.0), min(vu, 1.0)
        low, high = (a * vl, a * vu) if a > 0 else (a * vu, a * vl)
        lo += low
        hi += high
        if not math.isfinite(low):
            unbounded_lo.append(v)
        if not math.isfinite(high):
            unbounded_hi.append(v)
    return lo, hi, (unbounded_lo, unbounded_hi)


class BridgeBuilder:
    """Emits auxiliary variables and constraints into a bridged image.

    Variables returned by :meth:`add_variable` are ordinary
    :class:`~optmodel.expr.VariableRef` objects that share the source model's
    identity, so user bridges can combine them with the original function.
    """

    def __init__(self, image: ModelData, model_id):
        self.image = image
        self.id = model_id
        self.new_variables: list[int] = []
        self.pending: list = []

    def variable_name(self, ref) -> str:
        return self.image.names[ref.index]

    def add_variable(self, lb=-math.inf, ub=math.inf, kind=CONTINUOUS, name="") -> VariableRef:
        index = self.image.add_variable(lb, ub, kind, name)
        self.new_variables.append(index)
        return VariableRef(self, index)

    def add_constraint(self, f, s) -> None:
        f = as_expr(f)
        if isinstance(f, AffExpr) and hasattr(s, "shifted"):
            f = f.canonicalize()
            s = s.shifted(f.constant)
            f = AffExpr(f.owner, 0.0, f.terms)
        self.pending.append((f, s))


def bridge_indicator(f, s: Indicator, data: ModelData, builder: BridgeBuilder) -> None:
    """``z = on => g (<=|>=) c`` as one big-M row."""
    z, g = f
    (zi,) = z.terms
    lo, hi, (unb_lo, unb_hi) = affine_range(g, data)
    zterm = AffExpr(None, 0.0, {zi: 1.0})
    inner = s.inner
    if isinstance(inner, GreaterEqual):
        if unb_lo:
            raise UnboundedIndicatorBigM(f"variable {unb_lo[0]} has no finite bound for the big-M")
        c = inner.lb
        M = max(c - lo, 0.0)
        if s.activate_on:
            # g >= c - M (1 - z)
            builder.add_constraint(g - M * zterm, GreaterEqual(c - M))
        else:
            # g >= c - M z
            builder.add_constraint(g + M * zterm, GreaterEqual(c))
    else:
        if unb_hi:
            raise UnboundedIndicatorBigM(f"variable {unb_hi[0]} has no finite bound for the big-M")
        c = inner.ub
        M = max(hi - c, 0.0)
        if s.activate_on:
            # g <= c + M (1 - z)
            builder.add_constraint(g + M * zterm, LessEqual(c + M))
        else:
            # g <= c + M z
            builder.add_constraint(g - M * zterm, LessEqual(c))


def bridge_complements(f, s: Complements, data: ModelData, builder: BridgeBuilder) -> None:
    """``g ⟂ x`` with ``x in [l, u]`` via two binaries.

    ``b_l = 1`` pins x to l and allows g >= 0; ``b_u = 1`` pins x to u and
    allows g <= 0; with both zero g must vanish.
    """
    g, xe = f
    (xi,) = xe.terms
    l, u = data.lb[xi], data.ub[xi]
    if not (math.isfinite(l) and math.isfinite(u)):
        raise UnboundedComplementsBigM(f"variable {xi} needs finite bounds for the complementarity big-M")
    glo, ghi, (unb_lo, unb_hi) = affine_range(g, data)
    if unb_lo or unb_hi:
        v = (unb_lo or unb_hi)[0]
        raise UnboundedComplementsBigM(f"variable {v} leaves the complementing function unbounded")
    x = AffExpr(None, 0.0, {xi: 1.0})
    bl = builder.add_variable(0.0, 1.0, BINARY)
    bu = builder.add_variable(0.0, 1.0, BINARY)
    bl_e = AffExpr(None, 0.0, {bl.index: 1.0})
    bu_e = AffExpr(None, 0.0, {bu.index: 1.0})
    width = u - l
    builder.add_constraint(x + width * bl_e, LessEqual(u))  # x <= l + (u - l)(1 - b_l)
    builder.add_constraint(x - width * bu_e, GreaterEqual(l))  # x >= u - (u - l)(1 - b_u)
    builder.add_constraint(g - max(ghi, 0.0) * bl_e, LessEqual(0.0))
    builder.add_constraint(g - min(glo, 0.0) * bu_e, GreaterEqual(0.0))
    builder.add_constraint(bl_e + bu_e, LessEqual(1.0))


def bridge_interval(f: AffExpr, s: Interval, builder: BridgeBuilder) -> None:
    """``lb <= f <= ub`` as two one-sided rows."""
    builder.add_constraint(f, GreaterEqual(s.lb))
    builder.add_constraint(f, LessEqual(s.ub))


def _bridge_one(f, s, data, builder):
    if isinstance(s, Interval):
        bridge_interval(f, s, builder)
    elif isinstance(s, Indicator):
        bridge_indicator(f, s, data, builder)
    elif isinstance(s, Complements):
        bridge_complements(f, s, data, builder)
    elif isinstance(s, UserSet):
        reg = registered_set(s.key)
        if reg.bridge is None:
            raise UnsupportedConstraint(f"set {s.key!r} has no bridge")
        reg.bridge(f, s.payload, builder)
    else:
        raise UnsupportedConstraint(f"no bridge for {type(s).__name__}")


@dataclass
class BridgeMap:
    aux_variables: list = field(default_factory=list)
    # original constraint index -> constraint indices in the image
    bridged: dict = field(default_factory=dict)

    @property
    def active(self) -> bool:
        return bool(self.bridged)


def needs_bridge(kind: str, s, caps: BackendCapabilities) -> bool:
    return not caps.supports_set(kind, s)


def bridge_model(data: ModelData, caps: BackendCapabilities, model_id=None) -> tuple[ModelData, BridgeMap]:
    """Return the image of ``data`` the backend can accept, and the bridge map."""
    todo = [i for i, e in data.constraints.items() if needs_bridge(e.kind, e.set, caps)]
    bmap = BridgeMap()
    if not todo:
        return data, bmap
    image = data.copy()
    for index in sorted(todo):
        entry = image.constraints.pop(index)
        builder = BridgeBuilder(image, model_id)
        work = [(entry.function, entry.set, 0)]
        created = []
        while work:
            f, s, depth = work.pop(0)
            kind = function_kind(f)
            if isinstance(s, (Integer, Binary)) and kind == SCALAR_AFFINE and _single_variable(f):
                (v,) = f.terms
                image.kind[v] = BINARY if isinstance(s, Binary) else INTEGER
                continue
            if not needs_bridge(kind, s, caps):
                created.append(image.add_constraint(f, s, entry.name))
                continue
            if not _bridgeable(s):
                raise UnsupportedConstraint(
                    f"backend does not support ({kind}, {type(s).__name__}) and no bridge applies"
                )
            if depth >= MAX_CHAIN:
                raise UnsupportedConstraint(f"no bridge chain of length <= {MAX_CHAIN} for {type(s).__name__}")
            builder.pending = []
            _bridge_one(f, s, image, builder)
            work.extend((g, t, depth + 1) for g, t in builder.pending)
        bmap.bridged[index] = created
        bmap.aux_variables.extend(builder.new_variables)
    if not caps.integrality and any(
        image.kind[v] != CONTINUOUS for v in bmap.aux_variables
    ):
        raise UnsupportedConstraint("bridges need integer variables the backend does not support")
    return image, bmap


def _single_variable(f: AffExpr) -> bool:
    return len(f.terms) == 1 and f.constant == 0.0 and next(iter(f.terms.values())) == 1.0


def _bridgeable(s) -> bool:
    return isinstance(s, (Interval, Indicator, Complements, UserSet))
