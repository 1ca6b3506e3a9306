import math

import pytest

from oracles import fac_grid_oracle
from optmodel import MILPBackend, Model, TerminationStatus
from optmodel.benchgen import (
    count_fac_variables,
    count_lqcp_variables,
    fac_variable_count,
    generate_fac,
    generate_lqcp,
    lqcp_variable_count,
)

FAC_SIZES = {25: 67_651, 50: 520_301, 75: 1_732_951, 100: 4_080_601}
LQCP_SIZES = {500: 251_501, 1000: 1_003_001, 1500: 2_254_501, 2000: 4_006_001}


@pytest.mark.parametrize("G,want", sorted(FAC_SIZES.items()))
def test_fac_published_counts(G, want):
    assert fac_variable_count(G) == want
    assert count_fac_variables(G) == want


@pytest.mark.parametrize("N,want", sorted(LQCP_SIZES.items()))
def test_lqcp_published_counts(N, want):
    assert lqcp_variable_count(N) == want
    assert count_lqcp_variables(N) == want


@pytest.mark.parametrize("G", [1, 2, 3, 4])
def test_fac_counting_matches_build(G):
    inst = generate_fac(G)
    assert inst.model.num_variables == count_fac_variables(G) == fac_variable_count(G)
    # per-point rows: 1 assignment, then per facility 2 offsets, 4 epigraph, 1 big-M
    assert inst.model.num_constraints == (G + 1) ** 2 * (1 + 7 * G)


@pytest.mark.parametrize("N", [2, 3, 4, 10])
def test_lqcp_counting_matches_build(N):
    inst = generate_lqcp(N)
    assert inst.model.num_variables == count_lqcp_variables(N) == lqcp_variable_count(N)


def _lqcp_row_groups(N):
    inst = generate_lqcp(N)
    data = inst.model.data
    u_cols = {inst.u[i].index for i in inst.u}
    groups = {"interior": 0, "initial": 0, "boundary": 0}
    for e in data.constraints.values():
        terms = e.function.terms
        if len(terms) == 6:
            groups["interior"] += 1
        elif len(terms) == 1:
            groups["initial"] += 1
        elif len(terms) == 2 or u_cols & terms.keys():
            groups["boundary"] += 1
    return inst, groups


def test_lqcp_small_structure():
    inst, groups = _lqcp_row_groups(4)
    assert inst.model.num_variables == 29
    # i in 0..m-1 times j in 1..n-1, then j in 0..n, then two rows per i in 1..m
    assert groups == {"interior": 4 * 3, "initial": 5, "boundary": 2 * 4}
    assert inst.model.num_constraints == sum(groups.values())


@pytest.mark.parametrize("N", [4, 500])
def test_lqcp_quadratic_term_count(N):
    inst = generate_lqcp(N)
    q = inst.model.data.objective
    assert len(q.qterms) == (N + 1) + N
    assert all(i == j for i, j in q.qterms)


def test_lqcp_target_and_steps():
    inst = generate_lqcp(4)
    assert inst.dt == inst.dx == 0.25
    assert [inst.target(j) for j in range(5)] == [0.5, 0.46875, 0.375, 0.21875, 0.0]


def test_fac_one_matches_grid_oracle():
    m = Model(MILPBackend)
    inst = generate_fac(1, m)
    assert m.num_variables == 19
    m.optimize()
    assert m.termination_status() is TerminationStatus.OPTIMAL
    want = fac_grid_oracle(1)
    assert want == 1.0
    assert math.isclose(m.objective_value(), want, abs_tol=1e-9)
    assert math.isclose(m.value(inst.s), want, abs_tol=1e-9)


def test_fac_two_matches_grid_oracle():
    m = Model(MILPBackend)
    generate_fac(2, m)
    m.optimize()
    # the 0.05 grid contains an optimal placement here, so the oracle is exact
    assert math.isclose(m.objective_value(), fac_grid_oracle(2), abs_tol=1e-9)


@pytest.mark.parametrize("gen,size", [(generate_fac, 3), (generate_lqcp, 6)])
def test_generation_is_reproducible(gen, size):
    assert gen(size).model.data.digest() == gen(size).model.data.digest()


def test_generators_reject_small_sizes():
    with pytest.raises(ValueError):
        generate_fac(0)
    with pytest.raises(ValueError):
        generate_lqcp(1)
