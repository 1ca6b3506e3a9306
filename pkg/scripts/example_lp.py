"""Solve the two-variable example LP, print its duals and its LP-file form.

    python3 scripts/example_lp.py
"""
from optmodel import GreaterEqual, Model, SimplexBackend
from optmodel.fileio import to_lp_string


def main() -> None:
    m = Model(SimplexBackend)
    x = m.add_variable(0, name="x")
    y = m.add_variable(0, 3, name="y")
    c1 = m.add_constraint(6 * x + 8 * y, GreaterEqual(100), name="c1")
    c2 = m.add_constraint(7 * x + 12 * y, GreaterEqual(120), name="c2")
    m.set_objective("min", 12 * x + 20 * y)
    m.optimize()
    print(m.solution_summary(verbose=True))
    print(f"duals        : c1 = {m.dual(c1):.6g}, c2 = {m.dual(c2):.6g}")
    print()
    print(to_lp_string(m.data), end="")


if __name__ == "__main__":
    main()
