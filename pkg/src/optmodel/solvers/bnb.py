"""Reference MILP backend: LP-based branch and bound with callbacks.

Nodes are explored best-first on the parent LP bound; ties go to the deeper
node, then to the older one.  At every node the LP relaxation (plus all lazy
constraints and user cuts collected so far, which are global) is solved with
:mod:`optmodel.solvers.simplex`:

* infeasible, or not better than ``incumbent - gap_tol``: prune;
* integral within 1e-6: the lazy callback sees an INTEGER node; violated lazy
  constraints force a re-solve, otherwise the point becomes the incumbent;
* fractional: the user-cut callback (violated cuts force a re-solve), then the
  heuristic callback, then branching on the most fractional variable (higher
  ``branch_priority`` first, lowest index on ties).
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..backend import (
    LINEAR_SET_SUPPORT,
    BackendCapabilities,
    CallbackContext,
    InfeasibleSubmission,
    ReferenceBackend,
    SolveResults,
)
from ..data import CONTINUOUS, ModelData
from ..errors import CallbackError, ResultIndexOutOfRange
from ..status import CallbackKind, NodeStatus, ObjectiveSense, ResultStatus, TerminationStatus
from .simplex import solve_simplex, to_standard_form

INT_TOL = 1e-6


@dataclass
class BnBNode:
    lb: dict
    ub: dict
    bound: float
    depth: int
    id: int = 0


@dataclass
class SolutionPool:
    """Incumbents in discovery order; :meth:`ranked` gives them best first."""

    entries: list = field(default_factory=list)  # (values, objective, internal key)

    def add(self, values: dict, objective: float, key: float) -> None:
        self.entries.append((values, objective, key))

    def ranked(self) -> list:
        order = sorted(range(len(self.entries)), key=lambda k: (self.entries[k][2], -k))
        return [self.entries[k][:2] for k in order]

    def __len__(self):
        return len(self.entries)


def pool_query(results: SolveResults, k: int):
    """The k-th best stored solution as ``(assignment, objective)``."""
    if not 1 <= k <= results.result_count:
        raise ResultIndexOutOfRange(f"result {k} requested, {results.result_count} available")
    return results.solutions[k - 1]


def _fractionality(v: float) -> float:
    f = v - math.floor(v)
    return min(f, 1.0 - f)


def solve_bnb(data: ModelData, callbacks: Optional[dict] = None, params: Optional[dict] = None,
              on_incumbent: Optional[Callable] = None, priorities: Optional[dict] = None,
              backend=None) -> SolveResults:
    callbacks = callbacks or {}
    params = params or {}
    priorities = priorities or {}
    start = time.perf_counter()
    time_limit = params.get("time_limit", math.inf)
    node_limit = params.get("node_limit")
    gap_tol = params.get("gap_tol", 0.0)
    res = SolveResults()
    log: list = []
    res.stats["node_log"] = log
    res.stats["lazy_submissions"] = 0
    res.stats["user_cuts"] = 0
    res.stats["infeasible_heuristics"] = []
    res.stats["invalid_user_cuts"] = 0
    if time_limit <= 0:
        res.termination = TerminationStatus.TIME_LIMIT
        return res

    base = to_standard_form(data)
    columns = base.columns
    for j, v in enumerate(columns):
        if data.kind[v] != CONTINUOUS:
            if math.isfinite(base.lb[j]):
                base.lb[j] = math.ceil(base.lb[j] - INT_TOL)
            if math.isfinite(base.ub[j]):
                base.ub[j] = math.floor(base.ub[j] + INT_TOL)
    int_cols = [j for j, v in enumerate(columns) if data.kind[v] != CONTINUOUS]
    sign = -1.0 if data.sense is ObjectiveSense.MAX else 1.0
    n_values = data.next_variable

    lazy: list = []
    cuts: list = []
    pool = SolutionPool()
    incumbent = math.inf  # min-form objective of the incumbent
    incumbent_values: Optional[dict] = None
    counter = itertools.count()
    heap: list = []
    root = BnBNode({}, {}, -math.inf, 0, 0)
    heapq.heappush(heap, (root.bound, 0, next(counter), root))
    node_ids = itertools.count(1)
    processed = 0
    status: Optional[TerminationStatus] = None
    root_lp = None

    def full_values(x: np.ndarray) -> np.ndarray:
        vals = np.full(n_values, math.nan)
        vals[columns] = x
        return vals

    def run_callback(kind, node_status, values, node_id):
        ctx = CallbackContext(kind, node_status, values, backend,
                              frozenset(CallbackKind), node=node_id)
        try:
            callbacks[kind](ctx)
        except Exception as exc:  # user code
            raise CallbackError(f"{kind.value} callback raised {exc!r}") from exc
        finally:
            ctx.expire()
        return ctx

    def try_incumbent(values: dict, node_id: int, source: str) -> bool:
        nonlocal incumbent, incumbent_values
        obj = data.objective.evaluate_indexed(values)
        key = sign * obj
        if key < incumbent - 1e-12:
            incumbent = key
            incumbent_values = values
            pool.add(values, obj, key)
            log.append({"node": node_id, "event": "incumbent", "objective": obj, "source": source})
            if on_incumbent is not None and on_incumbent({"values": values, "objective": obj,
                                                          "node": node_id}):
                return True
        return False

    try:
        while heap:
            if time.perf_counter() - start >= time_limit:
                status = TerminationStatus.TIME_LIMIT
                break
            if node_limit is not None and processed >= node_limit:
                status = TerminationStatus.NODE_LIMIT
                break
            bound, _, _, node = heapq.heappop(heap)
            if bound >= incumbent - max(gap_tol, 1e-9):
                log.append({"node": node.id, "depth": node.depth, "event": "pruned_bound"})
                continue
            processed += 1
            cut_rounds = 0
            while True:
                lp = base.with_rows(lazy + cuts, [None] * (len(lazy) + len(cuts)))
                lp = lp.with_bounds(node.lb, node.ub)
                remaining = time_limit - (time.perf_counter() - start)
                r = solve_simplex(lp, time_limit=max(remaining, 1e-9))
                if r.termination is TerminationStatus.TIME_LIMIT:
                    status = TerminationStatus.TIME_LIMIT
                    break
                if node.id == 0 and root_lp is None:
                    root_lp = (lp, r)
                if r.termination is TerminationStatus.INFEASIBLE:
                    log.append({"node": node.id, "depth": node.depth, "event": "infeasible"})
                    break
                if r.termination is TerminationStatus.DUAL_INFEASIBLE:
                    status = TerminationStatus.DUAL_INFEASIBLE
                    res.ray = dict(zip(columns, r.ray.tolist()))
                    break
                key = sign * r.objective
                if key >= incumbent - max(gap_tol, 1e-9):
                    log.append({"node": node.id, "depth": node.depth, "event": "pruned_bound",
                                "bound": r.objective})
                    break
                x = r.x
                frac = [j for j in int_cols if abs(x[j] - round(x[j])) > INT_TOL]
                values = full_values(x)
                if not frac:
                    if CallbackKind.LAZY in callbacks:
                        ctx = run_callback(CallbackKind.LAZY, NodeStatus.INTEGER, values, node.id)
                        submitted = ctx.lazy + ctx.cuts
                        res.stats["lazy_submissions"] += len(ctx.lazy)
                        lazy.extend(ctx.lazy)
                        cuts.extend(ctx.cuts)
                        violated = any(not s.contains(f.evaluate_indexed(values), INT_TOL)
                                       for f, s in submitted)
                        if violated:
                            log.append({"node": node.id, "depth": node.depth, "event": "lazy_resolve"})
                            continue
                    point = {v: float(x[j]) for j, v in enumerate(columns)}
                    for j in int_cols:
                        point[columns[j]] = float(round(x[j]))
                    log.append({"node": node.id, "depth": node.depth, "event": "integer",
                                "objective": r.objective})
                    if try_incumbent(point, node.id, "node"):
                        status = TerminationStatus.INTERRUPTED
                    break
                if CallbackKind.USER_CUT in callbacks and cut_rounds < 50:
                    ctx = run_callback(CallbackKind.USER_CUT, NodeStatus.FRACTIONAL, values, node.id)
                    new = ctx.cuts + ctx.lazy
                    res.stats["user_cuts"] += len(new)
                    if __debug__ and incumbent_values is not None:
                        for f, s in new:
                            if not s.contains(f.evaluate_indexed(incumbent_values), INT_TOL):
                                res.stats["invalid_user_cuts"] += 1
                                warnings.warn("user cut removes the current incumbent", RuntimeWarning)
                    cuts.extend(new)
                    if any(not s.contains(f.evaluate_indexed(values), INT_TOL) for f, s in new):
                        cut_rounds += 1
                        log.append({"node": node.id, "depth": node.depth, "event": "cut_resolve"})
                        continue
                if CallbackKind.HEURISTIC in callbacks:
                    ctx = run_callback(CallbackKind.HEURISTIC, NodeStatus.FRACTIONAL, values, node.id)
                    stop = False
                    for candidate in ctx.heuristic:
                        reasons = _heuristic_problems(data, candidate, lazy)
                        if reasons:
                            res.stats["infeasible_heuristics"].append(InfeasibleSubmission(node.id, reasons))
                            continue
                        if try_incumbent(candidate, node.id, "heuristic"):
                            stop = True
                            break
                    if stop:
                        status = TerminationStatus.INTERRUPTED
                        break
                    if key >= incumbent - max(gap_tol, 1e-9):
                        break
                j = min(frac, key=lambda j: (-priorities.get(columns[j], 0.0),
                                             -_fractionality(x[j]), j))
                v = columns[j]
                log.append({"node": node.id, "depth": node.depth, "event": "branch",
                            "variable": v, "value": float(x[j]), "bound": r.objective})
                down = BnBNode(node.lb, {**node.ub, v: math.floor(x[j])}, key, node.depth + 1,
                               next(node_ids))
                up = BnBNode({**node.lb, v: math.ceil(x[j])}, node.ub, key, node.depth + 1,
                             next(node_ids))
                for child in (down, up):
                    heapq.heappush(heap, (key, -child.depth, next(counter), child))
                break
            if status is not None:
                break
    except CallbackError as exc:
        status = TerminationStatus.OTHER_ERROR
        res.error = exc
        res.raw_status = str(exc)

    if status is None:
        status = TerminationStatus.OPTIMAL if incumbent_values is not None else TerminationStatus.INFEASIBLE
    res.termination = status
    res.solutions = pool.ranked()
    if res.solutions:
        res.primal_status = ResultStatus.FEASIBLE_POINT
    if status is TerminationStatus.DUAL_INFEASIBLE:
        res.primal_status = ResultStatus.INFEASIBILITY_CERTIFICATE
        res.solutions = [(res.ray, math.nan)]
    open_bounds = [b for b, *_ in heap]
    if status is TerminationStatus.OPTIMAL:
        res.objective_bound = res.solutions[0][1]
    elif open_bounds and incumbent_values is not None:
        res.objective_bound = sign * min(min(open_bounds), incumbent)
    res.stats["nodes"] = processed
    res.stats["lazy_constraints"] = lazy
    res.stats["cuts"] = cuts
    if (status is TerminationStatus.OPTIMAL and not int_cols and not lazy and not cuts
            and root_lp is not None and root_lp[1].duals is not None):
        res.duals = dict(zip(root_lp[0].rows, root_lp[1].duals.tolist()))
        res.dual_status = ResultStatus.FEASIBLE_POINT
    return res


def _heuristic_problems(data: ModelData, candidate: dict, lazy: list) -> list:
    missing = [v for v in data.live_variables() if v not in candidate]
    if missing:
        return [f"no value for variable {missing[0]}"]
    values = np.full(data.next_variable, math.nan)
    for v, val in candidate.items():
        if 0 <= v < len(values):
            values[v] = val
    return data.violations(values, INT_TOL, extra=lazy)


class MILPBackend(ReferenceBackend):
    """Incremental MILP backend hosting lazy, user-cut and heuristic callbacks.

    ``on_incumbent`` is a backend-specific hook (reach it through
    ``model.backend()``): it is called with a dict describing every new
    incumbent and stops the search with INTERRUPTED when it returns a truthy
    value.
    """

    name = "BranchBound"
    capabilities = BackendCapabilities(
        incremental=True,
        sets=LINEAR_SET_SUPPORT,
        integrality=True,
        quadratic_objective=False,
        attributes=frozenset({
            ("optimizer", "time_limit"),
            ("optimizer", "node_limit"),
            ("optimizer", "gap_tol"),
            ("optimizer", "verbose"),
            ("variable", "branch_priority"),
            ("variable", "start"),
        }),
        provides_duals=False,
        callbacks=frozenset(CallbackKind),
        max_results=None,
    )

    def __init__(self):
        super().__init__()
        self.on_incumbent: Optional[Callable] = None

    def set_incumbent_hook(self, fn: Optional[Callable]) -> None:
        self.on_incumbent = fn

    def optimize(self) -> None:
        start = time.perf_counter()
        priorities = {v: p for (name, v), p in self.var_attributes.items() if name == "branch_priority"}
        res = solve_bnb(self.data, dict(self.callbacks), dict(self.options),
                        on_incumbent=self.on_incumbent, priorities=priorities, backend=self)
        res.solve_time = time.perf_counter() - start
        self._results = res
        if self.options.get("verbose"):
            print(f"{self.name}: {res.termination} after {res.stats.get('nodes', 0)} nodes")
