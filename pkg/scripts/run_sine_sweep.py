#!/usr/bin/env python3
"""Small-flutter sweep: y = x + epsilon * sin(omega * x) across amplitudes.

One row per flutter amplitude with the accuracy for each input
distribution and the mean; epsilon = 0 is the abstention control, every
repetition should land in the undecided column there.
"""

import argparse

from igci import run_sine


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--epsilons",
        default="0,0.001,0.005,0.02",
        help="comma-separated flutter amplitudes (epsilon * omega must stay below 1)",
    )
    parser.add_argument("--omega", type=float, default=40.0)
    parser.add_argument("--m", type=int, default=1000)
    parser.add_argument("--reps", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    epsilons = [float(tok) for tok in args.epsilons.split(",") if tok.strip()]
    header = None
    for epsilon in epsilons:
        result = run_sine(
            epsilon=epsilon, omega=args.omega, m=args.m, repetitions=args.reps, seed=args.seed
        )
        if header is None:
            labels = [label for label, _ in result.entries]
            header = f"{'epsilon':>9}  " + "".join(f"{lb:>18}" for lb in labels) + f"{'mean':>8}"
            print(f"omega = {args.omega}, m = {args.m}, reps = {args.reps}, seed = {args.seed}")
            print(header)
        cells = "".join(f"{tally.accuracy_pct:17.1f}%" for _, tally in result.entries)
        undecided = sum(tally.undecided for _, tally in result.entries)
        note = f"   ({undecided} undecided)" if undecided else ""
        print(f"{epsilon:>9}  {cells}{result.mean_accuracy_pct:7.1f}%{note}")


if __name__ == "__main__":
    main()
