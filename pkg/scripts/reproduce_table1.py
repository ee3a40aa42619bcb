"""Run the reference (L, N) grid and print each cell next to the published value.

    python3 scripts/reproduce_table1.py [--paths 1000000] [--seed 20240607] [--out table1.csv]
"""

import argparse
import logging

from discrete_merton.cli import run_table1
from discrete_merton.config import ExperimentConfig

PUBLISHED = {
    (10.0, 2): 0.054938, (10.0, 6): 0.004632, (10.0, 12): 0.001674, (10.0, 52): 0.000803,
    (10.0, 250): 9.506101e-5, (1e5, 2): 452.7109, (1e6, 2): 4527.022,
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    cfg = ExperimentConfig(paths=args.paths, workers=args.workers)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    table = run_table1(cfg)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table.to_csv())

    print(f"{'L':>8} {'N':>4} {'difference':>13} {'stderr':>10} {'published':>12} {'z':>7}")
    for row in table.rows:
        c = dict(zip(table.columns, row))
        ref = PUBLISHED.get((c["L"], c["N"]))
        z = f"{(c['difference'] - ref) / c['stderr']:+7.2f}" if ref is not None else ""
        ref_s = f"{ref:12.6g}" if ref is not None else ""
        print(f"{c['L']:8.0e} {c['N']:4d} {c['difference']:13.6e} {c['stderr']:10.2e} {ref_s:>12} {z:>7}")


if __name__ == "__main__":
    main()
