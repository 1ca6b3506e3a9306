import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optmodel import (
    EqualTo,
    GreaterEqual,
    Interval,
    LessEqual,
    MILPBackend,
    Model,
    PSDCone,
    ResultStatus,
    SimplexBackend,
    TerminationStatus,
    VariableAttribute,
    optimizer_with_attributes,
    register_attribute,
    solution_summary,
    unregister_attribute,
)
from optmodel.errors import (
    InvalidBounds,
    MixedModels,
    NoOptimizerAttached,
    NoResultAvailable,
    ResultIndexOutOfRange,
    ShapeMismatch,
    StaleReference,
    TypeMismatch,
    UnboundedComplementsVariable,
    UnknownAttribute,
    UnsupportedModification,
    VariableInUse,
)

# -- variables -----------------------------------------------------------------------


def test_add_variable_examples():
    m = Model()
    x1 = m.add_variable(0, 1, "continuous", "x1")
    assert (m.lower_bound(x1), m.upper_bound(x1), m.variable_name(x1)) == (0.0, 1.0, "x1")
    free = m.add_variable()
    assert m.lower_bound(free) == -math.inf and m.upper_bound(free) == math.inf
    xi = m.add_variable(0, 2.5, "integer", "x")
    assert m.integrality(xi) == "integer"
    assert m.num_variables == 3


def test_invalid_bounds():
    with pytest.raises(InvalidBounds):
        Model().add_variable(1, 0)


def test_names_are_not_identity():
    m = Model()
    a = m.add_variable(name="v")
    b = m.add_variable(name="v")
    assert a != b
    assert m.variable_name(a) == m.variable_name(b)


# -- constraints ---------------------------------------------------------------------


def test_add_constraint_examples(example_lp):
    m, x, y, c1, c2 = example_lp
    assert m.constraint_set(c1) == GreaterEqual(100)
    assert m.constraint_function(c1).terms == {x.index: 6.0, y.index: 8.0}
    trivial = m.add_constraint(x - x, EqualTo(0))
    assert m.constraint_function(trivial).terms == {}


def test_constant_moves_into_set():
    m = Model()
    x = m.add_variable()
    c = m.add_constraint(2 * x + 3, LessEqual(10))
    assert m.constraint_set(c) == LessEqual(7)
    assert m.constraint_function(c).constant == 0.0


def test_psd_constraint_is_matrix_affine():
    m = Model()
    x1, x2 = m.add_variables(2)
    c = m.add_constraint([[x1 - 1, 1.0 * x2], [1.0 * x2, x1 - 1]], PSDCone(2))
    assert c.function_kind == "matrix-affine"
    with pytest.raises(ShapeMismatch):
        m.add_constraint([[1.0 * x1, 1.0 * x2], [0.0, 1.0 * x1]], PSDCone(2))
    with pytest.raises(ShapeMismatch):
        m.add_constraint([[1.0 * x1]], PSDCone(2))


def test_shape_mismatch_scalar_set():
    m = Model()
    x, y = m.add_variables(2)
    with pytest.raises(ShapeMismatch):
        m.add_constraint([x, y], LessEqual(1))


def test_interval_requires_ordered_bounds():
    with pytest.raises(InvalidBounds):
        Interval(2, 1)


def test_complements_constraint():
    m = Model()
    x1 = m.add_variable(0)
    x2 = m.add_variable(0)
    c = m.add_complements_constraint(2 * x1 + 1, x2)
    assert c.function_kind == "vector-affine"
    with pytest.raises(UnboundedComplementsVariable):
        m.add_complements_constraint(1.0 * x1, m.add_variable())


def test_mixed_models_in_constraint_and_objective():
    m, other = Model(), Model()
    x = m.add_variable()
    y = other.add_variable()
    with pytest.raises(MixedModels):
        m.add_constraint(1.0 * y, LessEqual(1))
    with pytest.raises(MixedModels):
        m.set_objective("min", 1.0 * y)
    assert x.model is m


# -- objective -----------------------------------------------------------------------


def test_set_objective_replaces():
    m = Model(SimplexBackend)
    x = m.add_variable(0, 1)
    m.set_objective("min", 1.0 * x)
    m.set_objective("max", 1.0 * x)
    m.optimize()
    assert m.objective_value() == 1.0


def test_zero_objective_any_feasible_point():
    m = Model(SimplexBackend)
    x = m.add_variable(1, 2)
    m.set_objective("min", 0)
    m.optimize()
    assert m.termination_status() is TerminationStatus.OPTIMAL
    assert 1.0 <= m.value(x) <= 2.0
    assert m.objective_value() == 0.0


# -- deletion and modification -------------------------------------------------------


def test_delete_constraint(example_lp):
    m, x, y, c1, c2 = example_lp
    m.delete(c1)
    assert m.num_constraints == 1
    assert not m.is_valid(c1)
    with pytest.raises(StaleReference):
        m.constraint_function(c1)


def test_delete_variable_in_use(example_lp):
    m, x, *_ = example_lp
    with pytest.raises(VariableInUse):
        m.delete(x)


def test_delete_variable_then_value_is_stale():
    m = Model(SimplexBackend)
    x = m.add_variable(0, 1)
    y = m.add_variable(0, 1)
    m.delete(x)
    m.set_objective("max", 1.0 * y)
    m.optimize()
    with pytest.raises(StaleReference):
        m.value(x)
    assert m.value(y) == 1.0


def test_cascade_delete_removes_terms(example_lp):
    m, x, y, c1, c2 = example_lp
    m.delete(x, cascade=True)
    assert m.constraint_function(c1).terms == {y.index: 8.0}
    assert x.index not in m.objective_function().terms


def test_stable_handles_after_delete():
    m = Model()
    vs = m.add_variables(5)
    m.delete(vs[1])
    m.delete(vs[3])
    z = m.add_variable(name="z")
    assert [v.index for v in m.variables()] == [0, 2, 4, 5]
    assert z.index == 5
    assert m.is_valid(vs[4]) and not m.is_valid(vs[3])


def test_set_normalized_coefficient(example_lp):
    m, x, y, c1, c2 = example_lp
    m.set_normalized_coefficient(c1, x, 7)
    assert m.constraint_function(c1).terms == {x.index: 7.0, y.index: 8.0}
    assert m.constraint_set(c1) == GreaterEqual(100)
    m.set_normalized_coefficient(c1, x, 0)
    assert x.index not in m.constraint_function(c1).terms


def test_modify_then_restore_reoptimizes(example_lp):
    m, x, y, c1, c2 = example_lp
    m.set_optimizer(SimplexBackend)
    m.optimize()
    m.set_normalized_coefficient(c1, x, 7)
    m.optimize()
    m.set_normalized_coefficient(c1, x, 6)
    m.optimize()
    assert m.objective_value() == pytest.approx(205.0, abs=1e-8)


def test_modify_matrix_constraint_unsupported():
    m = Model()
    x1, x2 = m.add_variables(2)
    c = m.add_constraint([[1.0 * x1, 1.0 * x2], [1.0 * x2, 1.0 * x1]], PSDCone(2))
    with pytest.raises(UnsupportedModification):
        m.set_normalized_coefficient(c, x1, 2.0)


# -- attributes ----------------------------------------------------------------------

BUILTIN_VALUES = {
    "time_limit": 12.5,
    "iteration_limit": 40,
    "node_limit": 7,
    "gap_tol": 0.01,
    "verbose": False,
}


@pytest.mark.parametrize("name,value", sorted(BUILTIN_VALUES.items()))
def test_builtin_optimizer_attribute_round_trip(name, value):
    backend = SimplexBackend if name != "node_limit" and name != "gap_tol" else MILPBackend
    m = Model(backend)
    m.set_optimizer_attribute(name, value)
    assert m.get_optimizer_attribute(name) == value


def test_max_iter_round_trip():
    from optmodel import FWBackend

    m = Model(FWBackend)
    m.set_optimizer_attribute("max_iter", 10)
    assert m.get_optimizer_attribute("max_iter") == 10


def test_builtin_variable_and_model_attributes():
    m = Model(MILPBackend)
    x = m.add_variable(0, 1, "integer")
    m.set_attribute(VariableAttribute("branch_priority"), 1.0, x)
    assert m.get_attribute(VariableAttribute("branch_priority"), x) == 1.0
    m.set_attribute(VariableAttribute("start"), 1, x)
    assert m.get_attribute(VariableAttribute("start"), x) == 1.0
    from optmodel import ModelAttribute

    m.set_attribute(ModelAttribute("name"), "demo")
    assert m.get_attribute(ModelAttribute("name")) == "demo"


def test_unknown_attribute():
    m = Model(SimplexBackend)
    with pytest.raises(UnknownAttribute):
        m.set_optimizer_attribute("no_such_param", 1)


def test_attribute_type_mismatch():
    m = Model(SimplexBackend)
    with pytest.raises(TypeMismatch):
        m.set_optimizer_attribute("time_limit", "soon")


def test_registered_attribute_round_trip():
    key = register_attribute(VariableAttribute("colour"), str)
    try:
        m = Model()
        x = m.add_variable()
        m.set_attribute(key, "red", x)
        assert m.get_attribute(key, x) == "red"
    finally:
        unregister_attribute(key)


def test_optimizer_with_attributes_time_limit(example_lp):
    m, *_ = example_lp
    m.set_optimizer(optimizer_with_attributes(SimplexBackend, [("time_limit", 0.0)]))
    m.optimize()
    assert m.termination_status() is TerminationStatus.TIME_LIMIT


def test_optimizer_with_attributes_empty_is_bare(example_lp):
    m, *_ = example_lp
    m.set_optimizer(optimizer_with_attributes(SimplexBackend, []))
    m.optimize()
    assert m.objective_value() == pytest.approx(205.0, abs=1e-8)


def test_optimizer_with_attributes_independent():
    base = optimizer_with_attributes(MILPBackend)
    a = optimizer_with_attributes(base, [("gap_tol", 0.1)])
    b = optimizer_with_attributes(base, [("gap_tol", 0.0)])
    ma, mb = Model(a), Model(b)
    assert ma.get_optimizer_attribute("gap_tol") == 0.1
    assert mb.get_optimizer_attribute("gap_tol") == 0.0
    assert ma.backend() is not mb.backend()


# -- optimize and results ------------------------------------------------------------


def test_optimize_needs_optimizer():
    with pytest.raises(NoOptimizerAttached):
        Model().optimize()


def test_example_lp_values(example_lp):
    m, x, y, c1, c2 = example_lp
    m.set_optimizer(SimplexBackend)
    m.optimize()
    assert m.termination_status() is TerminationStatus.OPTIMAL
    assert m.primal_status() is ResultStatus.FEASIBLE_POINT
    assert m.value(x) == pytest.approx(15.0, abs=1e-8)
    assert m.value(y) == pytest.approx(1.25, abs=1e-8)
    assert m.value(12 * x + 20 * y) == pytest.approx(205.0, abs=1e-8)
    with pytest.raises(ResultIndexOutOfRange):
        m.value(x, 2)


def test_empty_model_optimal():
    m = Model(SimplexBackend)
    m.optimize()
    assert m.termination_status() is TerminationStatus.OPTIMAL
    assert m.objective_value() == 0.0
    assert m.result_count() == 1


def test_infeasible_model_has_no_result():
    m = Model(SimplexBackend)
    x = m.add_variable()
    m.add_constraint(1.0 * x, GreaterEqual(1))
    m.add_constraint(1.0 * x, LessEqual(0))
    m.optimize()
    assert m.termination_status() is TerminationStatus.INFEASIBLE
    assert m.result_count() == 0
    assert m.primal_status() is ResultStatus.NO_SOLUTION
    with pytest.raises(NoResultAvailable):
        m.value(x)


def test_mutation_invalidates_results(example_lp):
    m, x, y, c1, c2 = example_lp
    m.set_optimizer(SimplexBackend)
    m.optimize()
    m.set_bounds(y, 0, 2)
    with pytest.raises(NoResultAvailable):
        m.value(x)
    with pytest.raises(NoResultAvailable):
        m.dual(c1)
    assert m.termination_status() is TerminationStatus.OPTIMIZE_NOT_CALLED


def test_reoptimize_is_deterministic(example_lp):
    m, x, y, *_ = example_lp
    m.set_optimizer(SimplexBackend)
    m.optimize()
    first = (m.termination_status(), m.objective_value(), m.value(x), m.value(y))
    m.optimize()
    assert (m.termination_status(), m.objective_value(), m.value(x), m.value(y)) == first


# -- solution summary ----------------------------------------------------------------


def test_summary_example_lp(example_lp):
    m, *_ = example_lp
    m.set_optimizer(SimplexBackend)
    m.optimize()
    text = solution_summary(m)
    lines = text.splitlines()
    assert "termination_status : OPTIMAL" in lines
    assert "objective_value : 205.00" in lines
    keys = [ln.split(" : ")[0] for ln in lines]
    assert keys == ["solver_name", "termination_status", "primal_status", "dual_status",
                    "objective_value", "result_count", "solve_time"]


def test_summary_verbose_lists_variables(example_lp):
    m, *_ = example_lp
    m.set_optimizer(SimplexBackend)
    m.optimize()
    extra = solution_summary(m, verbose=True).splitlines()[7:]
    assert len(extra) == 2
    assert extra[0].strip().startswith("x :")


def test_summary_time_limit(example_lp):
    m, *_ = example_lp
    m.set_optimizer(optimizer_with_attributes(SimplexBackend, [("time_limit", 0.0)]))
    m.optimize()
    text = m.solution_summary()
    assert "termination_status : TIME_LIMIT" in text
    assert "objective_value" not in text


def test_summary_before_optimize():
    with pytest.raises(NoResultAvailable):
        solution_summary(Model(SimplexBackend))


# -- property: random edit sequences keep handles and counts consistent ---------------

ops = st.lists(st.tuples(st.sampled_from(["addv", "addc", "delc", "delv"]), st.integers(0, 50)),
               max_size=30)


@settings(max_examples=60, deadline=None)
@given(ops)
def test_edit_sequences_keep_live_handles(seq):
    m = Model()
    live_v, live_c = [], []
    for op, k in seq:
        if op == "addv":
            live_v.append(m.add_variable(0, 1))
        elif op == "addc" and live_v:
            v = live_v[k % len(live_v)]
            live_c.append((m.add_constraint(1.0 * v, LessEqual(1)), v))
        elif op == "delc" and live_c:
            c, _ = live_c.pop(k % len(live_c))
            m.delete(c)
        elif op == "delv" and live_v:
            v = live_v[k % len(live_v)]
            if any(u == v for _, u in live_c):
                with pytest.raises(VariableInUse):
                    m.delete(v)
            else:
                live_v.remove(v)
                m.delete(v)
    assert m.num_variables == len(live_v)
    assert m.num_constraints == len(live_c)
    assert sorted(v.index for v in m.variables()) == sorted(v.index for v in live_v)
    for c, v in live_c:
        assert m.constraint_function(c).terms == {v.index: 1.0}
