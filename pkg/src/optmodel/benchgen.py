"""Generators for the facility-location (fac) and linear-quadratic control (lqcp) families.

Both generators build through the public :class:`~optmodel.model.Model` API,
so a generated model can be attached in caching or direct mode.

Each generator declares its variables in a separate phase.  Running that phase
against :class:`CountingModel` yields the exact variable count of a size without
allocating the model, which is how the largest sizes are checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .expr import AffExpr, QuadExpr
from .model import Model
from .sets import EqualTo, GreaterEqual
from .status import ObjectiveSense

LQCP_SMOOTHING = 0.001
FAC_BIG_M = 2.0  # L1 diameter of the unit square


class CountingModel:
    """Stand-in for :class:`Model` that only counts variable declarations."""

    def __init__(self):
        self.num_variables = 0

    def add_variable(self, lb=-math.inf, ub=math.inf, integrality="continuous", name=""):
        self.num_variables += 1
        return None


def fac_variable_count(G: int) -> int:
    return 4 * (G + 1) ** 2 * G + 2 * G + 1


def lqcp_variable_count(N: int) -> int:
    return (N + 1) ** 2 + N


@dataclass
class FacInstance:
    model: object
    G: int
    s: object = None
    y: dict = field(default_factory=dict)  # (f, k) -> var
    z: dict = field(default_factory=dict)  # (i, j, f) -> var
    d: dict = field(default_factory=dict)  # (i, j, f) -> var
    r: dict = field(default_factory=dict)  # (i, j, f, k) -> var


@dataclass
class LqcpInstance:
    model: object
    N: int
    y: dict = field(default_factory=dict)  # (i, j) -> var
    u: dict = field(default_factory=dict)  # i -> var

    @property
    def dt(self) -> float:
        return 1.0 / self.N

    @property
    def dx(self) -> float:
        return 1.0 / self.N

    def target(self, j: int) -> float:
        return 0.5 * (1.0 - (j * self.dx) ** 2)


def _declare_fac(inst: FacInstance) -> None:
    m, G = inst.model, inst.G
    inst.s = m.add_variable(name="s")
    for f in range(1, G + 1):
        for k in (1, 2):
            inst.y[f, k] = m.add_variable(0.0, 1.0, name=f"y[{f},{k}]")
    cells = [(i, j, f) for i in range(G + 1) for j in range(G + 1) for f in range(1, G + 1)]
    for key in cells:
        inst.z[key] = m.add_variable(0.0, 1.0, "binary", name="z[{},{},{}]".format(*key))
    for key in cells:
        inst.d[key] = m.add_variable(0.0, name="d[{},{},{}]".format(*key))
    for i, j, f in cells:
        for k in (1, 2):
            inst.r[i, j, f, k] = m.add_variable(name=f"r[{i},{j},{f},{k}]")


def count_fac_variables(G: int) -> int:
    """Variable count of fac-G from the generator's declaration phase, without building it."""
    inst = FacInstance(CountingModel(), G)
    _declare_fac(inst)
    return inst.model.num_variables


def generate_fac(G: int, model: Optional[Model] = None) -> FacInstance:
    """Place G facilities in the unit square minimising the worst L1 distance from
    any grid point ``(i/G, j/G)`` to its assigned facility.
    """
    if G < 1:
        raise ValueError("fac needs G >= 1")
    m = model if model is not None else Model()
    inst = FacInstance(m, G)
    _declare_fac(inst)
    one = EqualTo(1.0)
    zero_ge = GreaterEqual(0.0)
    big_m = GreaterEqual(-FAC_BIG_M)
    offsets: dict[float, EqualTo] = {}
    s = inst.s
    for i in range(G + 1):
        for j in range(G + 1):
            assign = AffExpr()
            for f in range(1, G + 1):
                assign.add_term(inst.z[i, j, f], 1.0)
            m.add_constraint(assign, one)
            p = (i / G, j / G)
            for f in range(1, G + 1):
                for k in (1, 2):
                    # r = y - p
                    rhs = offsets.get(-p[k - 1])
                    if rhs is None:
                        rhs = offsets[-p[k - 1]] = EqualTo(-p[k - 1])
                    m.add_constraint(inst.r[i, j, f, k] - inst.y[f, k], rhs)
                d = inst.d[i, j, f]
                r1, r2 = inst.r[i, j, f, 1], inst.r[i, j, f, 2]
                for s1 in (1.0, -1.0):
                    for s2 in (1.0, -1.0):
                        e = AffExpr()
                        e.add_term(d, 1.0)
                        e.add_term(r1, -s1)
                        e.add_term(r2, -s2)
                        m.add_constraint(e, zero_ge)
                # s >= d - M (1 - z)
                e = AffExpr()
                e.add_term(s, 1.0)
                e.add_term(d, -1.0)
                e.add_term(inst.z[i, j, f], -FAC_BIG_M)
                m.add_constraint(e, big_m)
    m.set_objective(ObjectiveSense.MIN, s)
    return inst


def _declare_lqcp(inst: LqcpInstance) -> None:
    m, N = inst.model, inst.N
    for i in range(N + 1):
        for j in range(N + 1):
            inst.y[i, j] = m.add_variable(name=f"y[{i},{j}]")
    for i in range(1, N + 1):
        inst.u[i] = m.add_variable(-1.0, 1.0, name=f"u[{i}]")


def count_lqcp_variables(N: int) -> int:
    inst = LqcpInstance(CountingModel(), N)
    _declare_lqcp(inst)
    return inst.model.num_variables


def generate_lqcp(N: int, model: Optional[Model] = None) -> LqcpInstance:
    """Boundary control of the 1-D heat equation discretised by Crank-Nicolson."""
    if N < 2:
        raise ValueError("lqcp needs N >= 2")
    m = model if model is not None else Model()
    inst = LqcpInstance(m, N)
    _declare_lqcp(inst)
    y, u = inst.y, inst.u
    dt, dx = inst.dt, inst.dx
    zero = EqualTo(0.0)
    half_inv_h2 = 0.5 / dx**2
    for i in range(N):
        for j in range(1, N):
            # (y[i+1,j] - y[i,j]) / dt = 1/(2 dx^2) (second differences at rows i and i+1)
            e = AffExpr()
            e.add_term(y[i + 1, j], 1.0 / dt + 2.0 * half_inv_h2)
            e.add_term(y[i, j], -1.0 / dt - 2.0 * half_inv_h2)
            e.add_term(y[i, j - 1], -half_inv_h2)
            e.add_term(y[i, j + 1], -half_inv_h2)
            e.add_term(y[i + 1, j - 1], -half_inv_h2)
            e.add_term(y[i + 1, j + 1], -half_inv_h2)
            m.add_constraint(e, zero)
    for j in range(N + 1):
        m.add_constraint(1.0 * y[0, j], zero)
    for i in range(1, N + 1):
        m.add_constraint(y[i, 1] - y[i, 0], zero)
        # y[i,n] - y[i,n-1] = dx (u[i] - y[i,n])
        e = AffExpr()
        e.add_term(y[i, N], 1.0 + dx)
        e.add_term(y[i, N - 1], -1.0)
        e.add_term(u[i], -dx)
        m.add_constraint(e, zero)
    q = QuadExpr()
    for j in range(N + 1):
        w = 0.25 * dx * (1.0 if j in (0, N) else 2.0)
        t = inst.target(j)
        v = y[N, j]
        # w (y - t)^2 = w y^2 - 2 w t y + w t^2
        q.add_quad_term(v, v, w)
        q.affine.add_term(v, -2.0 * w * t)
        q.affine.constant += w * t * t
    wu = 0.25 * LQCP_SMOOTHING * dt * 2.0
    for i in range(1, N + 1):
        q.add_quad_term(u[i], u[i], wu)
    m.set_objective(ObjectiveSense.MIN, q)
    return inst
