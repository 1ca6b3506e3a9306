"""Reference LP backend: bounded-variable two-phase revised simplex.

Every row ``a'x (+ const) in S`` becomes ``a'x + s = rhs`` with one slack
column whose bounds encode the set:

============  =====  ================
set           rhs    slack bounds
============  =====  ================
LessEqual     ub     [0, inf)
GreaterEqual  lb     (-inf, 0]
EqualTo       rhs    [0, 0]
Interval      ub     [0, ub - lb]
============  =====  ================

Maximisation is handled by negating the costs.  Duals are the simplex
multipliers of the minimisation form, so a ``>=`` row has a nonnegative dual
and a ``<=`` row a nonpositive one regardless of the objective sense.

The basis inverse is kept dense and updated with a product-form step; it is
recomputed from scratch every ``REFACTOR_EVERY`` pivots, at which point a
condition number above ``MAX_CONDITION`` aborts with ``NumericalFailure``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..backend import LINEAR_SET_SUPPORT, BackendCapabilities, ReferenceBackend, SolveResults
from ..data import BINARY, SCALAR_AFFINE, ModelData
from ..errors import NotInfeasible, NotLinear, NumericalFailure, UnsupportedConstraint
from ..expr import QuadExpr
from ..sets import EqualTo, GreaterEqual, Interval, LessEqual
from ..status import ObjectiveSense, ResultStatus, TerminationStatus

FEAS_TOL = 1e-8
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 50
MAX_CONDITION = 1e12


@dataclass
class StandardFormLP:
    """``min c'x  s.t.  A x = b,  lb <= x <= ub`` with a slack per row.

    Columns ``0 .. n_struct-1`` are the model variables listed in ``columns``;
    column ``n_struct + i`` is the slack of row ``i`` (constraint ``rows[i]``).
    """

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    n_struct: int
    columns: list
    rows: list
    sense: ObjectiveSense = ObjectiveSense.MIN
    constant: float = 0.0

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    @property
    def num_columns(self) -> int:
        return self.A.shape[1]

    def with_bounds(self, lb: dict, ub: dict) -> "StandardFormLP":
        """Copy with tightened structural bounds, keyed by model variable index."""
        new_lb = self.lb.copy()
        new_ub = self.ub.copy()
        col = {v: j for j, v in enumerate(self.columns)}
        for v, val in lb.items():
            new_lb[col[v]] = val
        for v, val in ub.items():
            new_ub[col[v]] = val
        return StandardFormLP(self.A, self.b, self.c, new_lb, new_ub, self.n_struct,
                              self.columns, self.rows, self.sense, self.constant)

    def with_rows(self, extra: list, tags: list) -> "StandardFormLP":
        """Copy with additional linear rows ``(AffExpr, set)``."""
        if not extra:
            return self
        col = {v: j for j, v in enumerate(self.columns)}
        m, n = self.num_rows, self.n_struct
        k = len(extra)
        struct = np.zeros((m + k, n))
        struct[:m] = self.A[:, :n]
        b = np.concatenate([self.b, np.zeros(k)])
        slack_lb = np.concatenate([self.lb[n:], np.zeros(k)])
        slack_ub = np.concatenate([self.ub[n:], np.zeros(k)])
        for r, (f, s) in enumerate(extra):
            for v, a in f.terms.items():
                struct[m + r, col[v]] += a
            b[m + r], slack_lb[m + r], slack_ub[m + r] = _row_data(s, f.constant)
        A = np.hstack([struct, np.eye(m + k)])
        c = np.concatenate([self.c[:n], np.zeros(m + k)])
        lb = np.concatenate([self.lb[:n], slack_lb])
        ub = np.concatenate([self.ub[:n], slack_ub])
        return StandardFormLP(A, b, c, lb, ub, n, self.columns, list(self.rows) + list(tags),
                              self.sense, self.constant)


def _row_data(s, constant: float):
    if isinstance(s, LessEqual):
        return s.ub - constant, 0.0, math.inf
    if isinstance(s, GreaterEqual):
        return s.lb - constant, -math.inf, 0.0
    if isinstance(s, EqualTo):
        return s.rhs - constant, 0.0, 0.0
    if isinstance(s, Interval):
        return s.ub - constant, 0.0, s.ub - s.lb
    raise UnsupportedConstraint(f"{type(s).__name__} is not a linear set")


def to_standard_form(data: ModelData, objective: bool = True) -> StandardFormLP:
    """Build the slack-extended form of a linear model (integrality is relaxed)."""
    obj = data.objective
    if isinstance(obj, QuadExpr):
        if objective and any(c != 0.0 for c in obj.qterms.values()):
            raise NotLinear("objective has quadratic terms")
        obj = obj.affine
    columns = data.live_variables()
    col = {v: j for j, v in enumerate(columns)}
    n = len(columns)
    entries = sorted(data.constraints.items())
    m = len(entries)
    A = np.zeros((m, n + m))
    b = np.zeros(m)
    lb = np.empty(n + m)
    ub = np.empty(n + m)
    for j, v in enumerate(columns):
        lo, hi = data.lb[v], data.ub[v]
        if data.kind[v] == BINARY:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
        lb[j], ub[j] = lo, hi
    rows = []
    for i, (index, e) in enumerate(entries):
        if e.kind != SCALAR_AFFINE:
            if e.kind == "scalar-quadratic":
                raise NotLinear(f"constraint {index} is quadratic")
            raise UnsupportedConstraint(f"constraint {index} is {e.kind}")
        for v, a in e.function.terms.items():
            A[i, col[v]] += a
        b[i], lb[n + i], ub[n + i] = _row_data(e.set, e.function.constant)
        A[i, n + i] = 1.0
        rows.append(index)
    c = np.zeros(n + m)
    if objective:
        sign = -1.0 if data.sense is ObjectiveSense.MAX else 1.0
        for v, a in obj.terms.items():
            c[col[v]] += sign * a
    return StandardFormLP(A, b, c, lb, ub, n, columns, rows, data.sense, obj.constant)


@dataclass
class LPResult:
    termination: TerminationStatus
    x: Optional[np.ndarray] = None  # structural values, ordered like lp.columns
    duals: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None  # all columns, min form
    objective: float = math.nan
    ray: Optional[np.ndarray] = None
    phase1_objective: float = 0.0
    iterations: int = 0
    pivots: list = field(default_factory=list)
    slacks: Optional[np.ndarray] = None


class RevisedSimplex:
    """Solver state; kept between solves so a new cost vector can warm start."""

    def __init__(self, lp: StandardFormLP, time_limit: float = math.inf,
                 iteration_limit: Optional[int] = None, record_pivots: bool = False):
        self.lp = lp
        m, n = lp.A.shape
        self.m, self.n = m, n
        self.time_limit = time_limit
        self.iteration_limit = iteration_limit
        self.record_pivots = record_pivots
        self.iterations = 0
        self.pivots: list = []
        self.bland_threshold = 3 * (m + n)
        self.phase1_objective = 0.0
        self.ready = False

    # -- setup ---------------------------------------------------------------------
    def _initial_basis(self):
        lp, m, n = self.lp, self.m, self.n
        A = np.hstack([lp.A, np.eye(m)])
        lb = np.concatenate([lp.lb, np.zeros(m)])
        ub = np.concatenate([lp.ub, np.full(m, math.inf)])
        x = np.where(np.isfinite(lp.lb), lp.lb, np.where(np.isfinite(lp.ub), lp.ub, 0.0))
        x = np.concatenate([x, np.zeros(m)])
        ns = lp.n_struct
        struct_act = lp.A[:, :ns] @ x[:ns] if m else np.zeros(0)
        basis = np.empty(m, dtype=int)
        signs = np.ones(m)
        for i in range(m):
            s = ns + i
            needed = lp.b[i] - struct_act[i]
            if lb[s] - FEAS_TOL <= needed <= ub[s] + FEAS_TOL:
                basis[i] = s
                x[s] = needed
                ub[n + i] = 0.0
            else:
                x[s] = lb[s] if needed < lb[s] else ub[s]
                r = needed - x[s]
                signs[i] = 1.0 if r >= 0 else -1.0
                A[i, n + i] = signs[i]
                x[n + i] = abs(r)
                basis[i] = n + i
        self.A, self.lbx, self.ubx, self.x = A, lb, ub, x
        self.basis = basis
        self.is_basic = np.zeros(n + m, dtype=bool)
        self.is_basic[basis] = True
        binv = np.eye(m)
        for i in range(m):
            if basis[i] == n + i:
                binv[i, i] = signs[i]
        self.binv = binv
        self.since_refactor = 0
        self.ready = True

    def _refactor(self):
        B = self.A[:, self.basis]
        if self.m:
            if np.linalg.cond(B) > MAX_CONDITION:
                raise NumericalFailure("basis condition number exceeds 1e12")
            self.binv = np.linalg.inv(B)
            nb = ~self.is_basic
            rhs = self.lp.b - self.A[:, nb] @ self.x[nb]
            self.x[self.basis] = self.binv @ rhs
        self.since_refactor = 0

    # -- main loop -------------------------------------------------------------------
    def _iterate(self, cost: np.ndarray, deadline: float) -> tuple[str, Optional[np.ndarray]]:
        A, x, lbx, ubx = self.A, self.x, self.lbx, self.ubx
        degenerate = 0
        bland = False
        while True:
            if self.iteration_limit is not None and self.iterations >= self.iteration_limit:
                return "iteration_limit", None
            if time.perf_counter() > deadline:
                return "time_limit", None
            if self.since_refactor >= REFACTOR_EVERY:
                self._refactor()
            y = cost[self.basis] @ self.binv
            d = cost - y @ A
            nonbasic = ~self.is_basic
            inc = nonbasic & (x < ubx) & (d < -OPT_TOL)
            dec = nonbasic & (x > lbx) & (d > OPT_TOL)
            eligible = inc | dec
            if not eligible.any():
                return "optimal", None
            if bland:
                q = int(np.flatnonzero(eligible)[0])
            else:
                q = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
            direction = 1.0 if inc[q] else -1.0
            w = self.binv @ A[:, q]
            delta = -direction * w
            xb = x[self.basis]
            lbb = lbx[self.basis]
            ubb = ubx[self.basis]
            with np.errstate(divide="ignore", invalid="ignore"):
                t_dec = np.where(delta < -PIVOT_TOL, (xb - lbb) / -delta, math.inf)
                t_inc = np.where(delta > PIVOT_TOL, (ubb - xb) / delta, math.inf)
            ratios = np.maximum(np.minimum(t_dec, t_inc), 0.0)
            t_flip = ubx[q] - lbx[q]
            r = -1
            t = math.inf
            if self.m:
                t = float(ratios.min())
                if math.isfinite(t):
                    ties = np.flatnonzero(ratios <= t + 1e-12)
                    if bland:
                        r = int(ties[np.argmin(self.basis[ties])])
                    else:
                        r = int(ties[np.argmax(np.abs(delta[ties]))])
            if t_flip <= t:
                t, r = t_flip, -1
            if not math.isfinite(t):
                ray = np.zeros(self.n + self.m)
                ray[q] = direction
                ray[self.basis] = delta
                return "unbounded", ray
            self.iterations += 1
            x[q] += direction * t
            if self.m:
                x[self.basis] += delta * t
            if r < 0:
                x[q] = ubx[q] if direction > 0 else lbx[q]
                if self.record_pivots:
                    self.pivots.append((q, -1))
            else:
                leaving = int(self.basis[r])
                x[leaving] = lbx[leaving] if delta[r] < 0 else ubx[leaving]
                row = self.binv[r] / w[r]
                self.binv -= np.outer(w, row)
                self.binv[r] = row
                self.basis[r] = q
                self.is_basic[q] = True
                self.is_basic[leaving] = False
                self.since_refactor += 1
                if self.record_pivots:
                    self.pivots.append((q, leaving))
            if t <= 1e-12:
                degenerate += 1
                if degenerate >= self.bland_threshold:
                    bland = True
            else:
                degenerate = 0
                bland = False

    def _finish(self, status, cost, ray=None) -> LPResult:
        lp = self.lp
        ns = lp.n_struct
        term = {
            "optimal": TerminationStatus.OPTIMAL,
            "unbounded": TerminationStatus.DUAL_INFEASIBLE,
            "time_limit": TerminationStatus.TIME_LIMIT,
            "iteration_limit": TerminationStatus.ITERATION_LIMIT,
        }[status]
        res = LPResult(term, iterations=self.iterations, pivots=list(self.pivots),
                       phase1_objective=self.phase1_objective)
        res.x = self.x[:ns].copy()
        res.slacks = self.x[ns:self.n].copy()
        if status == "optimal":
            y = cost[self.basis] @ self.binv if self.m else np.zeros(0)
            res.duals = y
            res.reduced_costs = (cost - y @ self.A)[: self.n]
        if ray is not None:
            res.ray = ray[:ns].copy()
        sign = -1.0 if lp.sense is ObjectiveSense.MAX else 1.0
        res.objective = sign * float(lp.c[:ns] @ res.x) + lp.constant
        return res

    def solve(self) -> LPResult:
        start = time.perf_counter()
        if self.time_limit <= 0:
            return LPResult(TerminationStatus.TIME_LIMIT)
        deadline = start + self.time_limit
        if np.any(self.lp.lb > self.lp.ub + FEAS_TOL):
            return LPResult(TerminationStatus.INFEASIBLE, phase1_objective=math.inf)
        self._initial_basis()
        n, m = self.n, self.m
        art_cost = np.concatenate([np.zeros(n), (self.ubx[n:] > 0).astype(float)])
        if art_cost.any():
            status, _ = self._iterate(art_cost, deadline)
            if status != "optimal":
                return LPResult(TerminationStatus[status.upper()], iterations=self.iterations)
            self.phase1_objective = float(self.x[n:].sum())
            scale = 1.0 + (float(np.abs(self.lp.b).max()) if m else 0.0)
            if self.phase1_objective > FEAS_TOL * scale:
                return LPResult(TerminationStatus.INFEASIBLE, iterations=self.iterations,
                                phase1_objective=self.phase1_objective, pivots=list(self.pivots))
        self.ubx[n:] = 0.0
        self.x[n:] = 0.0
        if art_cost.any():
            self._refactor()
        return self.resolve(self.lp.c, _deadline=deadline)

    def resolve(self, c: np.ndarray, _deadline: Optional[float] = None) -> LPResult:
        """Phase 2 from the current (primal feasible) basis with costs ``c``."""
        if _deadline is None:
            _deadline = time.perf_counter() + self.time_limit
        cost = np.concatenate([c, np.zeros(self.m)])
        status, ray = self._iterate(cost, _deadline)
        return self._finish(status, cost, ray)


def solve_simplex(lp: StandardFormLP, time_limit: float = math.inf,
                  iteration_limit: Optional[int] = None, record_pivots: bool = False) -> LPResult:
    """Solve ``lp`` from scratch with the two-phase method."""
    return RevisedSimplex(lp, time_limit, iteration_limit, record_pivots).solve()


def is_feasible(data: ModelData) -> bool:
    lp = to_standard_form(data, objective=False)
    return solve_simplex(lp).termination is not TerminationStatus.INFEASIBLE


def compute_iis(data: ModelData) -> list[tuple[str, int]]:
    """Deletion filter over constraints (index order) then finite variable bounds.

    Members are ``("constraint", index)``, ``("lower", var)`` and
    ``("upper", var)``.
    """
    if is_feasible(data):
        raise NotInfeasible("the model is feasible")
    work = data.copy()
    members = [("constraint", i) for i in sorted(work.constraints)]
    for v in work.live_variables():
        if math.isfinite(work.lb[v]):
            members.append(("lower", v))
        if math.isfinite(work.ub[v]):
            members.append(("upper", v))
    keep = []
    for kind, index in members:
        saved = _relax(work, kind, index)
        if is_feasible(work):
            _restore(work, kind, index, saved)
            keep.append((kind, index))
    return keep


def _relax(work: ModelData, kind: str, index: int):
    if kind == "constraint":
        return work.constraints.pop(index)
    if kind == "lower":
        saved, work.lb[index] = work.lb[index], -math.inf
    else:
        saved, work.ub[index] = work.ub[index], math.inf
    if work.kind[index] == BINARY:
        saved = (saved, work.kind[index])
        work.kind[index] = "I"
    return saved


def _restore(work: ModelData, kind: str, index: int, saved):
    if kind == "constraint":
        work.constraints[index] = saved
        return
    if isinstance(saved, tuple):
        saved, work.kind[index] = saved
    if kind == "lower":
        work.lb[index] = saved
    else:
        work.ub[index] = saved


class SimplexBackend(ReferenceBackend):
    """Incremental LP backend with duals, certificates and IIS."""

    name = "SimplexLP"
    capabilities = BackendCapabilities(
        incremental=True,
        sets=LINEAR_SET_SUPPORT,
        integrality=False,
        quadratic_objective=False,
        attributes=frozenset({
            ("optimizer", "time_limit"),
            ("optimizer", "iteration_limit"),
            ("optimizer", "verbose"),
            ("variable", "start"),
        }),
        provides_duals=True,
        supports_iis=True,
        max_results=1,
    )

    def optimize(self) -> None:
        start = time.perf_counter()
        res = SolveResults()
        limit = self.time_limit()
        if limit <= 0:
            res.termination = TerminationStatus.TIME_LIMIT
            res.raw_status = "time limit reached before phase 1"
            self._results = res
            return
        lp = to_standard_form(self.data)
        lp_res = solve_simplex(lp, time_limit=limit, iteration_limit=self.options.get("iteration_limit"))
        fill_lp_results(res, lp, lp_res)
        res.solve_time = time.perf_counter() - start
        self._results = res
        if self.options.get("verbose"):
            print(f"{self.name}: {res.termination} after {lp_res.iterations} iterations")

    def compute_iis(self):
        return compute_iis(self.data)


def fill_lp_results(res: SolveResults, lp: StandardFormLP, lp_res: LPResult) -> None:
    res.termination = lp_res.termination
    res.stats["iterations"] = lp_res.iterations
    res.stats["phase1_objective"] = lp_res.phase1_objective
    if lp_res.termination is TerminationStatus.OPTIMAL:
        values = dict(zip(lp.columns, lp_res.x.tolist()))
        res.solutions = [(values, lp_res.objective)]
        res.primal_status = ResultStatus.FEASIBLE_POINT
        res.dual_status = ResultStatus.FEASIBLE_POINT
        res.duals = dict(zip(lp.rows, lp_res.duals.tolist()))
        res.objective_bound = lp_res.objective
    elif lp_res.termination is TerminationStatus.DUAL_INFEASIBLE:
        ray = dict(zip(lp.columns, lp_res.ray.tolist()))
        res.ray = ray
        res.primal_status = ResultStatus.INFEASIBILITY_CERTIFICATE
        res.solutions = [(ray, math.nan)]
    elif lp_res.termination is TerminationStatus.INFEASIBLE:
        res.raw_status = f"phase 1 objective {lp_res.phase1_objective!r}"
