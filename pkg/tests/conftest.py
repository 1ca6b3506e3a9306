import math

import pytest

from optmodel import EqualTo, GreaterEqual, Model, quicksum

EXAMPLE_LP_COST = (12.0, 20.0)
EXAMPLE_LP_ROWS = ((6.0, 8.0, 100.0), (7.0, 12.0, 120.0))


def build_example_lp(m: Model):
    """min 12x + 20y s.t. 6x + 8y >= 100, 7x + 12y >= 120, x >= 0, 0 <= y <= 3."""
    x = m.add_variable(0.0, math.inf, name="x")
    y = m.add_variable(0.0, 3.0, name="y")
    c1 = m.add_constraint(6 * x + 8 * y, GreaterEqual(100), name="c1")
    c2 = m.add_constraint(7 * x + 12 * y, GreaterEqual(120), name="c2")
    m.set_objective("min", 12 * x + 20 * y)
    return x, y, c1, c2


@pytest.fixture
def example_lp():
    m = Model()
    return (m, *build_example_lp(m))


def build_regression(m: Model, A, y):
    """min sum r_i^2 with r = A x - y, sum x = 1, 0 <= x <= 1."""
    rows, cols = A.shape
    x = m.add_variables(cols, 0.0, 1.0)
    r = m.add_variables(rows)
    for i in range(rows):
        m.add_constraint(r[i] - quicksum(A[i, j] * x[j] for j in range(cols)), EqualTo(-y[i]))
    m.add_constraint(quicksum(x), EqualTo(1.0))
    m.set_objective("min", quicksum(ri * ri for ri in r))
    return x, r


# -- acceptance reporting ------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
