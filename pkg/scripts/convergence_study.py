"""Gap to the continuous benchmark as the step count grows.

Prints the deterministic surrogate gap, the exact-expectation value and the
Monte Carlo gap per N, plus the fitted log-log slope of the surrogate gap.
"""

import argparse
import logging

from discrete_merton.cli import run_convergence
from discrete_merton.config import ExperimentConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=200_000)
    ap.add_argument("--N", type=int, nargs="+", default=[2, 6, 12, 52, 250, 1000])
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    table = run_convergence(ExperimentConfig(paths=args.paths, N_list=tuple(args.N), L_list=(10.0,)))
    print(f"{'N':>6} {'det_gap':>12} {'mc_gap':>12} {'stderr':>10}")
    for N, g, d, se in zip(*(table.column(k) for k in ("N", "det_gap", "difference", "stderr"))):
        print(f"{N:6d} {g:12.4e} {d:12.4e} {se:10.2e}")
    print(f"deterministic gap slope vs h: {table.summary['det_gap_slope']:.4f}")


if __name__ == "__main__":
    main()
