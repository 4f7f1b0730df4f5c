#!/usr/bin/env python3
"""Accuracy grid over input distributions x mechanisms, four noise regimes.

Prints one 5x5 table per regime: the deterministic block, then additive
uniform, Gaussian, and Laplace noise at the chosen multiplier. Rows are
input distributions A-E, columns mechanisms a-e, entries are percent
correct over the repetitions (u marks cells with any undecided runs).
"""

import argparse

from igci import (
    EstimatorKind,
    GRID_INPUTS,
    GRID_MECHANISMS,
    NoiseKind,
    NoiseSpec,
    ReferenceFamily,
    run_grid,
)


def print_table(result) -> None:
    cols = [label for label, _ in GRID_MECHANISMS]
    print("     " + "".join(f"{c:>8}" for c in cols))
    for row_label, _ in GRID_INPUTS:
        cells = []
        for col_label in cols:
            tally = result.cells[(row_label, col_label)]
            mark = "u" if tally.undecided else " "
            cells.append(f"{tally.accuracy_pct:7.1f}{mark}")
        print(f"  {row_label}  " + "".join(cells))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=1000, help="sample size per repetition")
    parser.add_argument("--reps", type=int, default=100, help="repetitions per cell")
    parser.add_argument("--lambda", dest="lam", type=float, default=0.03, help="noise multiplier for the noisy regimes")
    parser.add_argument("--estimator", choices=[e.value for e in EstimatorKind], default="entropy")
    parser.add_argument("--reference", choices=["uniform", "gaussian"], default="uniform")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    regimes = [
        ("deterministic (lambda = 0)", NoiseSpec()),
        (f"uniform noise, lambda = {args.lam}", NoiseSpec(NoiseKind.UNIFORM_UNIT, lam=args.lam)),
        (f"gaussian noise, lambda = {args.lam}", NoiseSpec(NoiseKind.STD_NORMAL, lam=args.lam)),
        (f"laplace noise, lambda = {args.lam}", NoiseSpec(NoiseKind.LAPLACE, lam=args.lam)),
    ]
    estimator = EstimatorKind(args.estimator)
    reference = ReferenceFamily(args.reference)
    for title, noise in regimes:
        result = run_grid(
            noise=noise,
            m=args.m,
            repetitions=args.reps,
            estimator=estimator,
            reference=reference,
            seed=args.seed,
        )
        print(f"\n{title}  [m={args.m}, reps={args.reps}, estimator={args.estimator}, seed={args.seed}]")
        print_table(result)


if __name__ == "__main__":
    main()
