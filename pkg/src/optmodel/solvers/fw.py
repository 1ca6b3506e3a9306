"""Reference convex-QP backend: Frank-Wolfe with exact line search.

The objective is ``f(x) = 1/2 x'Qx + c'x + k`` over the polytope given by the
model's linear constraints and bounds.  Each iteration solves the linear
minimisation oracle ``argmin_s grad f(x)'s`` with the revised simplex, warm
started from the previous oracle basis, and moves to
``x + gamma (s - x)`` with the exact minimiser ``gamma`` of the quadratic
along that segment.  The FW gap ``grad f(x)'(x - s)`` bounds ``f(x) - f*``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..backend import LINEAR_SET_SUPPORT, BackendCapabilities, ReferenceBackend, SolveResults
from ..data import ModelData
from ..errors import Infeasible, NotConvex, NotSymmetric, UnboundedDomain
from ..expr import QuadExpr
from ..status import ObjectiveSense, ResultStatus, TerminationStatus
from .simplex import RevisedSimplex, StandardFormLP, to_standard_form

PSD_SHIFT = 1e-10
DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 50_000


def validate_psd(Q) -> bool:
    """True iff ``Q + 1e-10 I`` admits a Cholesky factorisation."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {Q.shape}")
    if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(Q).max(initial=0.0))):
        raise NotSymmetric("matrix is not symmetric")
    try:
        np.linalg.cholesky(Q + PSD_SHIFT * np.eye(Q.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass
class QPInstance:
    """``min 1/2 x'Qx + c'x + constant`` over the polytope of ``lp`` (min form)."""

    Q: np.ndarray
    c: np.ndarray
    constant: float
    lp: StandardFormLP
    sense: ObjectiveSense = ObjectiveSense.MIN

    @classmethod
    def from_data(cls, data: ModelData) -> "QPInstance":
        lp = to_standard_form(data, objective=False)
        col = {v: j for j, v in enumerate(lp.columns)}
        n = lp.n_struct
        Q = np.zeros((n, n))
        c = np.zeros(n)
        obj = data.objective
        aff = obj.affine if isinstance(obj, QuadExpr) else obj
        for v, a in aff.terms.items():
            c[col[v]] += a
        if isinstance(obj, QuadExpr):
            for (u, v), a in obj.qterms.items():
                i, j = col[u], col[v]
                if i == j:
                    Q[i, i] += 2.0 * a
                else:
                    Q[i, j] += a
                    Q[j, i] += a
        if data.sense is ObjectiveSense.MAX:
            # maximising a concave quadratic is minimising its negation
            Q, c = -Q, -c
        return cls(Q, c, aff.constant, lp, data.sense)

    def value(self, x: np.ndarray) -> float:
        """Objective in the model's own sense."""
        f = 0.5 * x @ self.Q @ x + self.c @ x
        return (-f if self.sense is ObjectiveSense.MAX else f) + self.constant


@dataclass
class FWResult:
    termination: TerminationStatus
    x: Optional[np.ndarray] = None
    objective: float = math.nan
    gap: float = math.inf
    iterations: int = 0
    history: list = field(default_factory=list)


def solve_fw(qp: QPInstance, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
             time_limit: float = math.inf, record_history: bool = False) -> FWResult:
    start = time.perf_counter()
    if time_limit <= 0:
        return FWResult(TerminationStatus.TIME_LIMIT)
    if not validate_psd(qp.Q):
        raise NotConvex("objective Hessian is not positive semidefinite")
    deadline = start + time_limit
    lp = qp.lp
    n = lp.n_struct
    oracle = RevisedSimplex(lp)
    first = oracle.solve()
    if first.termination is TerminationStatus.INFEASIBLE:
        raise Infeasible("the constraint polytope is empty")
    x = first.x.copy()
    pad = np.zeros(lp.num_columns - n)
    Q, c = qp.Q, qp.c
    Qx = Q @ x
    f = 0.5 * x @ Qx + c @ x
    res = FWResult(TerminationStatus.ITERATION_LIMIT)
    k = 0
    gap = math.inf
    while True:
        g = Qx + c
        lmo = oracle.resolve(np.concatenate([g, pad]))
        if lmo.termination is TerminationStatus.DUAL_INFEASIBLE:
            raise UnboundedDomain("the constraint polytope is unbounded along a gradient direction")
        s = lmo.x
        d = x - s
        gap = float(g @ d)
        if record_history:
            res.history.append((f, gap))
        if gap <= tol:
            res.termination = TerminationStatus.LOCALLY_SOLVED
            break
        if k >= max_iter:
            res.termination = TerminationStatus.ITERATION_LIMIT
            break
        if time.perf_counter() > deadline:
            res.termination = TerminationStatus.TIME_LIMIT
            break
        Qd = Q @ d
        curv = float(d @ Qd)
        gamma = 1.0 if curv <= 0.0 else min(1.0, gap / curv)
        x = x - gamma * d
        Qx = Qx - gamma * Qd
        f = 0.5 * x @ Qx + c @ x
        k += 1
    res.x = x
    res.gap = max(gap, 0.0)
    res.iterations = k
    res.objective = qp.value(x)
    return res


class FWBackend(ReferenceBackend):
    """Incremental convex-QP backend (linear constraints, quadratic objective)."""

    name = "FrankWolfeQP"
    capabilities = BackendCapabilities(
        incremental=True,
        sets=LINEAR_SET_SUPPORT,
        integrality=False,
        quadratic_objective=True,
        attributes=frozenset({
            ("optimizer", "tol"),
            ("optimizer", "max_iter"),
            ("optimizer", "time_limit"),
            ("optimizer", "verbose"),
        }),
        provides_duals=False,
        max_results=1,
    )

    def optimize(self) -> None:
        start = time.perf_counter()
        res = SolveResults()
        limit = self.time_limit()
        if limit <= 0:
            res.termination = TerminationStatus.TIME_LIMIT
            self._results = res
            return
        qp = QPInstance.from_data(self.data)
        try:
            fw = solve_fw(qp, tol=self.options.get("tol", DEFAULT_TOL),
                          max_iter=self.options.get("max_iter", DEFAULT_MAX_ITER), time_limit=limit)
        except Infeasible as exc:
            res.termination = TerminationStatus.INFEASIBLE
            res.raw_status = str(exc)
            self._results = res
            return
        res.termination = fw.termination
        if fw.x is not None:
            res.solutions = [(dict(zip(qp.lp.columns, fw.x.tolist())), fw.objective)]
            res.primal_status = ResultStatus.FEASIBLE_POINT
        res.stats["fw_gap"] = fw.gap
        res.stats["iterations"] = fw.iterations
        res.solve_time = time.perf_counter() - start
        self._results = res
        if self.options.get("verbose"):
            print(f"{self.name}: {res.termination} gap {fw.gap:.3e} after {fw.iterations} iterations")
