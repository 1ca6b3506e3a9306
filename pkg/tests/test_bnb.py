import itertools
import math

import numpy as np
import pytest

from oracles import ip_enumeration_oracle
from optmodel import (
    CallbackKind,
    LessEqual,
    MILPBackend,
    Model,
    NodeStatus,
    SimplexBackend,
    TerminationStatus,
    VariableAttribute,
    node_status,
    pool_query,
    submit,
)
from optmodel.errors import ExpiredContext, ResultIndexOutOfRange

# -- lazy constraints ----------------------------------------------------------------


def lazy_model():
    """max x2 over integer x in [0, 2.5]^2 with two lazily enforced rows."""
    m = Model(MILPBackend)
    x = m.add_variables(2, 0, 2.5, "integer")
    m.set_objective("max", 1.0 * x[1])

    def lazy(ctx):
        if node_status(ctx) is not NodeStatus.INTEGER:
            return
        x1, x2 = ctx.value(x[0]), ctx.value(x[1])
        if x2 - x1 > 1 + 1e-6:
            submit(ctx, CallbackKind.LAZY, (x[1] - x[0], LessEqual(1)))
        if x1 + x2 > 3 + 1e-6:
            submit(ctx, CallbackKind.LAZY, (x[0] + x[1], LessEqual(3)))

    m.set_callback(CallbackKind.LAZY, lazy)
    return m, x


def _lazy_oracle():
    feasible = [(a, b) for a, b in itertools.product(range(3), repeat=2)
                if b - a <= 1 and a + b <= 3]
    best = max(b for _, b in feasible)
    # ties on the objective: the solver's answer must be among the optima
    return best, {p for p in feasible if p[1] == best}


def test_lazy_model():
    m, x = lazy_model()
    m.optimize()
    best, optima = _lazy_oracle()
    assert optima == {(1, 2)}
    assert m.termination_status() is TerminationStatus.OPTIMAL
    assert (m.value(x[0]), m.value(x[1])) == (1.0, 2.0)
    assert m.objective_value() == best == 2
    assert m.results.stats["lazy_submissions"] >= 1


def test_lazy_rows_hold_post_hoc():
    m, x = lazy_model()
    m.optimize()
    values = np.array([m.value(x[0]), m.value(x[1])])
    for f, s in m.results.stats["lazy_constraints"]:
        assert s.contains(f.evaluate_indexed(values), 1e-6)


def test_node_status_outside_callback():
    m, _ = lazy_model()
    kept = []
    m.set_callback(CallbackKind.LAZY, kept.append)
    m.optimize()
    with pytest.raises(ExpiredContext):
        node_status(kept[0])


# -- relaxation and limits -----------------------------------------------------------


def _lp(factory):
    m = Model(factory)
    x = m.add_variables(2, 0, 4)
    m.add_constraint(3 * x[0] + 2 * x[1], LessEqual(7))
    m.add_constraint(1 * x[0] + 4 * x[1], LessEqual(9))
    m.set_objective("max", 2 * x[0] + 3 * x[1])
    m.optimize()
    return m, x


def test_no_integrality_equals_simplex():
    a, xa = _lp(MILPBackend)
    b, xb = _lp(SimplexBackend)
    assert a.objective_value() == pytest.approx(b.objective_value(), abs=1e-12)
    assert [a.value(v) for v in xa] == pytest.approx([b.value(v) for v in xb], abs=1e-12)
    assert a.results.stats["nodes"] == 1


def test_time_limit_zero_skips_callbacks():
    m, _ = lazy_model()
    calls = []
    m.set_callback(CallbackKind.LAZY, calls.append)
    m.set_time_limit(0)
    m.optimize()
    assert m.termination_status() is TerminationStatus.TIME_LIMIT
    assert m.result_count() == 0
    assert calls == []


def test_node_limit():
    m = Model(MILPBackend)
    x = m.add_variables(6, 0, 1, "binary")
    w = [5, 7, 9, 11, 13, 15]
    m.add_constraint(sum(a * v for a, v in zip(w, x)), LessEqual(30.5))
    m.set_objective("max", sum((a + 1) * v for a, v in zip(w, x)))
    m.set_optimizer_attribute("node_limit", 2)
    m.optimize()
    assert m.termination_status() is TerminationStatus.NODE_LIMIT


def test_callback_error_is_other_error():
    m, _ = lazy_model()

    def broken(ctx):
        raise RuntimeError("boom")

    m.set_callback(CallbackKind.LAZY, broken)
    m.optimize()
    assert m.termination_status() is TerminationStatus.OTHER_ERROR
    assert "boom" in m.raw_status()


# -- solution pool -------------------------------------------------------------------


def test_pool_max_x():
    m = Model(MILPBackend)
    x = m.add_variable(0, 3, "integer")
    m.set_objective("max", 1.0 * x)
    m.optimize()
    assert m.result_count() >= 1
    assert pool_query(m.results, 1) == ({x.index: 3.0}, 3.0)


def knapsack():
    m = Model(MILPBackend)
    a, b, c = m.add_variables(3, 0, 1, "binary")
    m.add_constraint(2 * a + 3 * b + 4 * c, LessEqual(6))
    m.set_objective("max", 5 * a + 4 * b + 3 * c)
    return m, (a, b, c)


def test_pool_knapsack():
    m, (a, b, c) = knapsack()
    m.optimize()
    best = ip_enumeration_oracle([5, 4, 3], [[2, 3, 4]], [6], [0] * 3, [1] * 3, sense="max")
    assert best == 9
    values, obj = pool_query(m.results, 1)
    assert obj == best
    assert (values[a.index], values[b.index], values[c.index]) == (1.0, 1.0, 0.0)
    k = m.result_count()
    with pytest.raises(ResultIndexOutOfRange):
        pool_query(m.results, k + 1)
    with pytest.raises(ResultIndexOutOfRange):
        m.objective_value(k + 1)


def test_pool_entries_are_feasible_and_ranked():
    m, xs = knapsack()
    m.optimize()
    objs = [m.objective_value(k) for k in range(1, m.result_count() + 1)]
    assert objs == sorted(objs, reverse=True)
    for values, _ in m.results.solutions:
        point = np.array([values[v.index] for v in xs])
        assert m.data.is_feasible(point, 1e-6)


# -- user cuts -----------------------------------------------------------------------


def test_user_cut_at_fractional_node():
    m, (a, b, c) = knapsack()
    seen = []

    def cut(ctx):
        seen.append(node_status(ctx))
        if ctx.value(a) + ctx.value(b) + ctx.value(c) > 2 + 1e-6:
            submit(ctx, CallbackKind.USER_CUT, (a + b + c, LessEqual(2)))

    m.set_callback(CallbackKind.USER_CUT, cut)
    m.optimize()
    assert seen and all(s is NodeStatus.FRACTIONAL for s in seen)
    assert m.objective_value() == 9.0
    point = np.array([m.value(v) for v in (a, b, c)])
    for f, s in m.results.stats["cuts"]:
        assert s.contains(f.evaluate_indexed(point), 1e-6)
    assert m.results.stats["invalid_user_cuts"] == 0


# -- branching -----------------------------------------------------------------------


def _branch_instance(priority):
    m = Model(MILPBackend)
    x = m.add_variables(2, 0, 3, "integer")
    m.add_constraint(2.0 * x[0], LessEqual(1))  # LP value 0.5
    m.add_constraint(4.0 * x[1], LessEqual(1))  # LP value 0.25
    m.set_objective("max", x[0] + x[1])
    if priority:
        m.set_attribute(VariableAttribute("branch_priority"), 1.0, x[1])
    m.optimize()
    first = next(e for e in m.results.stats["node_log"] if e["event"] == "branch")
    return first["variable"], x


def test_branch_priority_changes_order():
    plain, x = _branch_instance(False)
    assert plain == x[0].index  # most fractional
    prioritised, x = _branch_instance(True)
    assert prioritised == x[1].index


def test_node_sequence_is_deterministic():
    m, _ = knapsack()
    m.optimize()
    log1 = list(m.results.stats["node_log"])
    m.optimize()
    assert m.results.stats["node_log"] == log1


# -- oracle suite --------------------------------------------------------------------


def random_ip(seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-5, 6, size=(4, 3)).astype(float)
    b = rng.integers(-3, 16, size=4).astype(float)
    c = rng.integers(-5, 6, size=3).astype(float)
    sense = "max" if seed % 2 else "min"
    return c, A, b, sense


@pytest.mark.parametrize("seed", range(100))
def test_random_ip_matches_enumeration(seed):
    c, A, b, sense = random_ip(seed)
    want = ip_enumeration_oracle(c, A, b, [0] * 3, [4] * 3, sense=sense)
    m = Model(MILPBackend)
    xs = m.add_variables(3, 0, 4, "integer")
    for row, r in zip(A, b):
        m.add_constraint(sum(a * x for a, x in zip(row, xs)), LessEqual(r))
    m.set_objective(sense, sum(ci * x for ci, x in zip(c, xs)))
    m.optimize()
    if want is None:
        assert m.termination_status() is TerminationStatus.INFEASIBLE
    else:
        assert m.termination_status() is TerminationStatus.OPTIMAL
        assert m.objective_value() == want
        assert all(math.isclose(m.value(x), round(m.value(x))) for x in xs)
