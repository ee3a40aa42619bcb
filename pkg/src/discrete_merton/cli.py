"""Batch experiment driver.

Subcommands: table1, convergence, ito, positivity, simulate.  Data goes to
``--out`` (or stdout), progress to stderr.  Exit status is 0 on success, 2 on
configuration errors and 3 when a surrogate factor turns nonpositive.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analytic, quadrature
from .config import ExperimentConfig, load_config
from .errors import ConfigError, ModelError, StepSizeError
from .market import Discretization, Strategy, simulate_path, simulate_stock
from .montecarlo import McConfig, noise_stream, simulate_terminal
from .utility import UtilitySpec

log = logging.getLogger("discrete_merton")


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12e}"
    return str(v)


def _require_constant(cfg: ExperimentConfig, what: str) -> None:
    if not cfg.is_constant:
        raise ConfigError(f"{what} needs constant coefficients", "a")


def _mc(cfg: ExperimentConfig) -> McConfig:
    return McConfig(cfg.paths, cfg.seed, cfg.workers)


def _loglog_slope(x, y) -> float:
    slope, _ = np.polyfit(np.log(np.asarray(x, float)), np.log(np.abs(np.asarray(y, float))), 1)
    return float(slope)


def run_table1(cfg: ExperimentConfig) -> Table:
    """Continuous benchmark minus Monte Carlo ``E U(x_N)`` under the Merton ratios.

    One path sweep per N; every L is evaluated on the retained terminal wealth.
    """
    _require_constant(cfg, "table1")
    bench = analytic.continuous_merton_utility(cfg.a, cfg.b, cfg.alpha, cfg.T, cfg.x0)
    table = Table(
        ["L", "N", "h", "difference", "stderr", "mean", "benchmark", "positivity_probability", "paths", "seed"]
    )
    cells = {}
    for N in cfg.N_list:
        disc = Discretization(cfg.T, N)
        params = cfg.market(N)
        ustar = analytic.merton_strategy(params, cfg.alpha, disc)
        log.info("table1: N=%d, %d paths", N, cfg.paths)
        sample = simulate_terminal(params, ustar, disc, cfg.x0, _mc(cfg))
        pos = analytic.positivity_probability(params, ustar, disc)
        for L in cfg.L_list:
            cells[(L, N)] = (sample.expected_utility(UtilitySpec(cfg.alpha, L)), disc.h, pos)
    for L in cfg.L_list:
        for N in cfg.N_list:
            est, h, pos = cells[(L, N)]
            table.rows.append([L, N, h, bench - est.mean, est.stderr, est.mean, bench, pos, est.paths, est.seed])
    return table


def run_convergence(cfg: ExperimentConfig) -> Table:
    """Gaps to the continuous benchmark as N grows, for ``L = L_list[0]``."""
    _require_constant(cfg, "convergence")
    L = cfg.L_list[0]
    spec = UtilitySpec(cfg.alpha, L)
    bench = analytic.continuous_merton_utility(cfg.a, cfg.b, cfg.alpha, cfg.T, cfg.x0)

    def det_gap(N: int) -> float:
        disc = Discretization(cfg.T, N)
        return bench - analytic.script_g_star(cfg.market(N), cfg.alpha, disc, cfg.x0)

    fit_h = [cfg.T / N for N in cfg.fit_N_list]
    slope = _loglog_slope(fit_h, [det_gap(N) for N in cfg.fit_N_list])
    table = Table(
        ["N", "h", "L", "benchmark", "g_star", "det_gap", "g_exact", "difference", "stderr",
         "det_gap_slope", "paths", "seed"],
        summary={"det_gap_slope": slope},
    )
    for N in sorted(cfg.N_list):
        disc = Discretization(cfg.T, N)
        params = cfg.market(N)
        ustar = analytic.merton_strategy(params, cfg.alpha, disc)
        log.info("convergence: N=%d", N)
        est = simulate_terminal(params, ustar, disc, cfg.x0, _mc(cfg)).expected_utility(spec)
        g_star = analytic.script_g_star(params, cfg.alpha, disc, cfg.x0)
        g_ex = quadrature.g_exact(params, ustar, cfg.alpha, disc, cfg.x0)
        table.rows.append([N, disc.h, L, bench, g_star, bench - g_star, g_ex, bench - est.mean,
                           est.stderr, slope, est.paths, est.seed])
    return table


def run_ito_study(cfg: ExperimentConfig) -> Table:
    """Remainder of the second-order step expansion over the h grid."""
    a = cfg.a if not isinstance(cfg.a, tuple) else cfg.a[0]
    b = cfg.b if not isinstance(cfg.b, tuple) else cfg.b[0]
    u = cfg.u if cfg.u is not None else a / ((1.0 - cfg.alpha) * b * b)
    fit = quadrature.ito_order_fit(u, a, b, cfg.alpha, cfg.h_grid)
    ratios = fit.bound_ratios(u, b)
    table = Table(
        ["h", "remainder", "bound_ratio", "slope", "K_hat", "u", "a", "b", "alpha"],
        summary={"slope": fit.slope, "K_hat": fit.constant},
    )
    for h, r, q in zip(fit.h_values, fit.remainders, ratios):
        table.rows.append([h, r, q, fit.slope, fit.constant, u, a, b, cfg.alpha])
    return table


def run_positivity(cfg: ExperimentConfig) -> Table:
    """Exact positivity probability next to the Monte Carlo frequency."""
    table = Table(["N", "h", "analytic", "mc_estimate", "stderr", "paths", "seed"])
    for N in sorted(cfg.N_list):
        disc = Discretization(cfg.T, N)
        params = cfg.market(N)
        ustar = analytic.merton_strategy(params, cfg.alpha, disc)
        log.info("positivity: N=%d", N)
        est = simulate_terminal(params, ustar, disc, cfg.x0, _mc(cfg)).positivity()
        exact = analytic.positivity_probability(params, ustar, disc)
        table.rows.append([N, disc.h, exact, est.mean, est.stderr, est.paths, est.seed])
    return table


def run_simulate(cfg: ExperimentConfig) -> Table:
    """One noise path per N: shocks, stock price and Merton-strategy wealth."""
    table = Table(["N", "n", "t", "xi", "stock", "wealth", "u", "path_index", "seed"])
    for N in cfg.N_list:
        disc = Discretization(cfg.T, N)
        params = cfg.market(N)
        ustar: Strategy = analytic.merton_strategy(params, cfg.alpha, disc)
        noise = noise_stream(cfg.seed, cfg.path_index, N)
        wealth = simulate_path(params, ustar, disc, cfg.x0, noise)
        stock = simulate_stock(params, disc, noise)
        for n in range(N + 1):
            xi = noise.xi[n - 1] if n > 0 else 0.0
            u = ustar.u[n] if n < N else math.nan
            table.rows.append([N, n, n * disc.h, xi, stock[n], wealth.x[n], u, cfg.path_index, cfg.seed])
    return table


COMMANDS = {
    "table1": run_table1,
    "convergence": run_convergence,
    "ito": run_ito_study,
    "positivity": run_positivity,
    "simulate": run_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discrete-merton", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="key = value experiment file")
    parser.add_argument("--out", help="CSV destination (default: stdout)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--paths", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("-q", "--quiet", action="store_true")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {k: getattr(args, k) for k in ("seed", "paths", "workers") if getattr(args, k) is not None}
    if args.out:
        overrides["output"] = args.out
    return cfg.replace(**overrides) if overrides else cfg


def _configure_logging(quiet: bool) -> None:
    # own handler on the package logger, bound to the current stderr
    for h in list(log.handlers):
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.WARNING if quiet else logging.INFO)
    log.propagate = False


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.quiet)
    try:
        cfg = resolve_config(args)
        table = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 2
    except StepSizeError as exc:
        log.error("numerical regime error: %s", exc)
        return 3
    except ModelError as exc:
        log.error("invalid input: %s", exc)
        return 2
    text = table.to_csv()
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
        log.info("wrote %d rows to %s", len(table.rows), cfg.output)
    else:
        sys.stdout.write(text)
    for key, value in table.summary.items():
        log.info("%s = %.6g", key, value)
    return 0


if __name__ == "__main__":
    sys.exit(main())
