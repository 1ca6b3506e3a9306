"""Least squares over the probability simplex, solved with the Frank-Wolfe backend.

    python3 scripts/constrained_regression.py [--seed 2022] [--max-iter 120000]
"""
import argparse

import numpy as np

from optmodel import EqualTo, FWBackend, Model, optimizer_with_attributes, quicksum


def build(m: Model, A: np.ndarray, y: np.ndarray):
    rows, cols = A.shape
    x = m.add_variables(cols, 0.0, 1.0)
    r = m.add_variables(rows)
    for i in range(rows):
        m.add_constraint(r[i] - quicksum(A[i, j] * x[j] for j in range(cols)), EqualTo(-y[i]))
    m.add_constraint(quicksum(x), EqualTo(1.0))
    m.set_objective("min", quicksum(ri * ri for ri in r))
    return x


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=2022)
    p.add_argument("--rows", type=int, default=30)
    p.add_argument("--cols", type=int, default=20)
    p.add_argument("--max-iter", type=int, default=120_000)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    A, y = rng.random((args.rows, args.cols)), rng.random(args.rows)
    m = Model(optimizer_with_attributes(FWBackend, [("max_iter", args.max_iter), ("tol", 1e-9)]))
    x = build(m, A, y)
    m.optimize()
    print(m.solution_summary())
    print(f"fw gap       : {m.results.stats['fw_gap']:.3e}")
    weights = np.array([m.value(v) for v in x])
    print("weights      :", np.array2string(weights, precision=4, suppress_small=True))


if __name__ == "__main__":
    main()
