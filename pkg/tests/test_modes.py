import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import build_example_lp
from optmodel import (
    Complements,
    GreaterEqual,
    LessEqual,
    MILPBackend,
    Model,
    PSDCone,
    SimplexBackend,
    TerminationStatus,
    direct_model,
)
from optmodel.bridges import affine_range, bridge_model
from optmodel.data import complements_satisfied, set_satisfied
from optmodel.errors import (
    NoOptimizerAttached,
    NotIncremental,
    SolverChangeInDirectMode,
    UnboundedComplementsBigM,
    UnboundedIndicatorBigM,
    UnsupportedConstraint,
)
from optmodel.fileio import OneShotFileBackend

# -- direct mode ---------------------------------------------------------------------


def test_direct_example_lp():
    m = direct_model(SimplexBackend())
    build_example_lp(m)
    m.optimize()
    assert m.objective_value() == pytest.approx(205.0, abs=1e-8)


def test_direct_rejects_one_shot(tmp_path):
    with pytest.raises(NotIncremental):
        direct_model(OneShotFileBackend(tmp_path))


def test_direct_indicator_is_eager():
    m = direct_model(MILPBackend())
    z = m.add_variable(0, 1, "binary")
    x = m.add_variables(2, 0, 1)
    with pytest.raises(UnsupportedConstraint):
        m.add_indicator_constraint(z, x[0] + x[1], GreaterEqual(1))


def test_direct_solver_cannot_change():
    m = direct_model(SimplexBackend())
    with pytest.raises(SolverChangeInDirectMode):
        m.set_optimizer(MILPBackend)


def test_every_mutation_is_one_apply():
    calls = []

    class Counting(SimplexBackend):
        def apply(self, delta):
            calls.append(type(delta).__name__)
            return super().apply(delta)

    m = direct_model(Counting())
    build_example_lp(m)
    assert calls == ["AddVariable", "AddVariable", "AddConstraint", "AddConstraint", "SetObjective"]


# -- escape handle -------------------------------------------------------------------


def test_on_incumbent_hook_interrupts():
    m = direct_model(MILPBackend())
    x = m.add_variables(3, 0, 5, "integer")
    m.add_constraint(3 * x[0] + 5 * x[1] + 7 * x[2], LessEqual(23.5))
    m.set_objective("max", 4 * x[0] + 6 * x[1] + 9 * x[2])
    hits = []
    m.backend().set_incumbent_hook(lambda info: hits.append(info) or True)
    m.optimize()
    assert m.termination_status() is TerminationStatus.INTERRUPTED
    assert len(hits) == 1
    assert m.result_count() == 1


def test_backend_before_attach():
    with pytest.raises(NoOptimizerAttached):
        Model().backend()


def test_optimizer_index(example_lp):
    m, x, y, *_ = example_lp
    m.set_optimizer(SimplexBackend)
    assert (m.optimizer_index(x), m.optimizer_index(y)) == (0, 1)
    m.delete(m.add_variable())
    z = m.add_variable()
    assert m.optimizer_index(z) == 2


# -- caching mode --------------------------------------------------------------------


def test_swap_backend_same_objective(example_lp):
    m, *_ = example_lp
    m.set_optimizer(SimplexBackend)
    m.optimize()
    first = m.objective_value()
    m.set_optimizer(MILPBackend)
    m.optimize()
    assert m.objective_value() == pytest.approx(first, abs=1e-9)


def test_caching_one_shot_full_load(example_lp, tmp_path):
    m, *_ = example_lp
    m.set_optimizer(lambda: OneShotFileBackend(tmp_path))
    assert m.sync_state == "EMPTY"
    m.optimize()
    assert m.objective_value() == pytest.approx(205.0, abs=1e-8)
    assert m.sync_state == "EMPTY"


def test_caching_invalidation(example_lp):
    m, x, y, c1, c2 = example_lp
    m.set_optimizer(SimplexBackend)
    m.optimize()
    assert m.sync_state == "IN_SYNC"
    m.set_normalized_coefficient(c1, x, 7)
    assert m.sync_state == "DIRTY"
    m.optimize()
    assert m.sync_state == "IN_SYNC"
    assert m.backend().state_digest() == m.data.digest()


def test_psd_attach_has_no_bridge():
    m = Model()
    x1, x2 = m.add_variables(2)
    m.add_constraint([[1.0 * x1, 1.0 * x2], [1.0 * x2, 1.0 * x1]], PSDCone(2))
    with pytest.raises(UnsupportedConstraint):
        m.set_optimizer(SimplexBackend)


# -- indicator bridge ----------------------------------------------------------------


def _indicator_model():
    m = Model(MILPBackend)
    z = m.add_variable(0, 1, "binary")
    x = m.add_variables(2, 0, 1)
    c = m.add_indicator_constraint(z, x[0] + x[1], GreaterEqual(1))
    return m, z, x, c


def test_indicator_big_m_value():
    m, z, x, c = _indicator_model()
    image, bmap = bridge_model(m.data, MILPBackend.capabilities)
    (row,) = bmap.bridged[c.index]
    e = image.constraints[row]
    # x1 + x2 >= 1 - (1 - z) * 1  <=>  x1 + x2 - z >= 0
    assert e.function.terms == {x[0].index: 1.0, x[1].index: 1.0, z.index: -1.0}
    assert e.set == GreaterEqual(0.0)
    lo, hi, _ = affine_range(m.constraint_function(c)[1], m.data)
    assert (lo, hi) == (0.0, 2.0)


def test_indicator_free_variable_raises():
    m = Model(MILPBackend)
    z = m.add_variable(0, 1, "binary")
    x = m.add_variable()
    m.add_indicator_constraint(z, 1.0 * x, LessEqual(0))
    with pytest.raises(UnboundedIndicatorBigM):
        m.optimize()


def test_indicator_solve_matches_enumeration():
    m, z, x, _ = _indicator_model()
    m.set_bounds(z, 1, 1)
    m.set_objective("min", x[0] + x[1])
    m.optimize()
    grid = np.arange(0.0, 1.0001, 0.25)
    best = min(a + b for a, b in itertools.product(grid, grid) if a + b >= 1)
    assert m.objective_value() == pytest.approx(best, abs=1e-9)


def _image_feasible(image, point, aux):
    """True if some 0/1 assignment of the auxiliaries makes ``point`` feasible for ``image``."""
    values = np.zeros(image.next_variable)
    for k, v in point.items():
        values[k] = v
    for bits in itertools.product((0.0, 1.0), repeat=len(aux)):
        values[aux] = bits
        if image.is_feasible(values, 1e-9):
            return True
    return False


@settings(max_examples=40, deadline=None)
@given(a=st.lists(st.integers(-2, 2), min_size=2, max_size=2), c=st.integers(-2, 2),
       upper=st.booleans(), on=st.booleans())
def test_indicator_bridge_soundness(a, c, upper, on):
    m = Model()
    z = m.add_variable(0, 1, "binary")
    x = m.add_variables(2, -1, 1)
    inner = LessEqual(c) if upper else GreaterEqual(c)
    m.add_indicator_constraint(z, a[0] * x[0] + a[1] * x[1], inner, activate_on=on)
    image, bmap = bridge_model(m.data, MILPBackend.capabilities)
    grid = np.arange(-1.0, 1.0001, 0.5)
    for zv, u, v in itertools.product((0.0, 1.0), grid, grid):
        pt = {z.index: zv, x[0].index: u, x[1].index: v}
        want = m.data.is_feasible(np.array([zv, u, v]), 1e-9)
        assert _image_feasible(image, pt, bmap.aux_variables) == want


# -- complements bridge --------------------------------------------------------------


def test_complements_definition_examples():
    # (x, x) with x >= 0: only x = 0 qualifies
    for xv in (0.0, 0.5, 3.0):
        assert complements_satisfied(xv, xv, 0.0, math.inf, 1e-12) == (xv == 0.0)
    # (y - 1, x) with x in [0, 10] at (x, y) = (0, 0)
    assert not complements_satisfied(-1.0, 0.0, 0.0, 10.0, 1e-12)


def _complements_model(lo=0.0, hi=10.0):
    m = Model(MILPBackend)
    x1 = m.add_variable(lo, hi)
    x2 = m.add_variable(lo, hi)
    c = m.add_complements_constraint(2 * x1 + 1, x2)
    return m, x1, x2, c


def test_complements_bridge_grid():
    m, x1, x2, c = _complements_model()
    image, bmap = bridge_model(m.data, MILPBackend.capabilities)
    assert len(bmap.aux_variables) == 2
    e = m.data.constraints[c.index]
    grid = np.arange(0.0, 10.0001, 0.5)
    agree = 0
    for u, v in itertools.product(grid, grid):
        want = set_satisfied(e.function, e.set, [u, v], 1e-9, m.data)
        got = _image_feasible(image, {x1.index: u, x2.index: v}, bmap.aux_variables)
        assert got == want, (u, v)
        agree += 1
    assert agree == len(grid) ** 2
    # x2 at its upper bound would need 2 x1 + 1 <= 0
    assert not _image_feasible(image, {x1.index: 0.0, x2.index: 10.0}, bmap.aux_variables)


def test_complements_infinite_bounds_raise():
    m = Model(MILPBackend)
    x = m.add_variable(0, 1)
    y = m.add_variable(0)  # no finite upper bound for the big-M
    m.add_complements_constraint(1.0 * x, y)
    with pytest.raises(UnboundedComplementsBigM):
        m.optimize()


@settings(max_examples=30, deadline=None)
@given(a=st.integers(-2, 2), b=st.integers(-2, 2), lo=st.integers(-2, 0), hi=st.integers(1, 2))
def test_complements_bridge_soundness(a, b, lo, hi):
    m = Model()
    x = m.add_variable(lo, hi)
    y = m.add_variable(lo, hi)
    c = m.add_complements_constraint(a * x + b, y)
    image, bmap = bridge_model(m.data, MILPBackend.capabilities)
    e = m.data.constraints[c.index]
    grid = np.arange(lo, hi + 1e-9, 0.5)
    for u, v in itertools.product(grid, grid):
        want = set_satisfied(e.function, e.set, [u, v], 1e-9, m.data)
        assert _image_feasible(image, {x.index: u, y.index: v}, bmap.aux_variables) == want


def test_complements_solve():
    # 2 x1 + 1 stays positive on [0, 10], so x2 is pinned to its lower bound
    m, x1, x2, _ = _complements_model()
    m.set_objective("min", x1 - x2)
    m.optimize()
    assert m.termination_status() is TerminationStatus.OPTIMAL
    assert (m.value(x1), m.value(x2)) == pytest.approx((0.0, 0.0), abs=1e-9)
    assert set(m.results.solutions[0][0]) == {x1.index, x2.index}


def test_complements_set_type():
    m, *_, c = _complements_model()
    assert isinstance(m.constraint_set(c), Complements)


# -- mode equivalence ----------------------------------------------------------------


def _random_model(m, rng, integer):
    n = rng.integers(2, 5)
    xs = [m.add_variable(float(rng.integers(-3, 1)), float(rng.integers(1, 4)),
                         "integer" if integer and rng.random() < 0.7 else "continuous")
          for _ in range(n)]
    for _ in range(rng.integers(1, 5)):
        coefs = rng.integers(-4, 5, size=n).astype(float)
        f = sum(c * x for c, x in zip(coefs, xs))
        s = (LessEqual if rng.random() < 0.5 else GreaterEqual)(float(rng.integers(-5, 6)))
        m.add_constraint(f, s)
    obj = rng.integers(-5, 6, size=n).astype(float)
    m.set_objective("max" if rng.random() < 0.5 else "min", sum(c * x for c, x in zip(obj, xs)))


@pytest.mark.parametrize("seed", range(50))
def test_mode_equivalence(seed):
    integer = seed % 2 == 1
    factory = MILPBackend if integer else SimplexBackend
    cached = Model(factory)
    direct = direct_model(factory())
    for m in (cached, direct):
        _random_model(m, np.random.default_rng(seed), integer)
    cached.optimize()
    direct.optimize()
    assert cached.termination_status() is direct.termination_status()
    if cached.termination_status() is TerminationStatus.OPTIMAL:
        assert abs(cached.objective_value() - direct.objective_value()) <= 1e-9
