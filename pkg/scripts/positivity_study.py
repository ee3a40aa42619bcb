"""Probability that wealth stays positive on every step, exact vs simulated."""

import argparse
import logging

from discrete_merton.cli import run_positivity
from discrete_merton.config import ExperimentConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=1_000_000)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    table = run_positivity(ExperimentConfig(paths=args.paths))
    print(f"{'N':>4} {'analytic':>18} {'mc':>10} {'stderr':>10}")
    for N, p, m, se in zip(*(table.column(k) for k in ("N", "analytic", "mc_estimate", "stderr"))):
        print(f"{N:4d} {p:18.15f} {m:10.6f} {se:10.2e}")


if __name__ == "__main__":
    main()
