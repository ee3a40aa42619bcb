"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Runs the full-scale experiments (10^6 paths); expect a couple of minutes.
"""

import math

import mpmath
import numpy as np
import pytest

from discrete_merton import (
    Discretization,
    MarketParams,
    McConfig,
    StepSizeError,
    continuous_merton_utility,
    g_exact,
    ito_order_fit,
    merton_strategy,
    noise_stream,
    script_g,
    script_g_derivatives,
    script_g_star,
    second_moment,
    simulate_terminal,
    wealth_product_form,
)
from discrete_merton import cli
from discrete_merton.config import ExperimentConfig

pytestmark = pytest.mark.slow

PUBLISHED_L10 = {2: 0.054938, 6: 0.004632, 12: 0.001674, 52: 0.000803, 250: 9.506101e-5}
PUBLISHED_N2 = {1e5: 452.7109, 1e6: 4527.022}


@pytest.fixture(scope="module")
def table1():
    return cli.run_table1(ExperimentConfig())


def cell(table, L, N):
    for row in table.rows:
        if row[0] == L and row[1] == N:
            return dict(zip(table.columns, row))
    raise KeyError((L, N))


def test_criterion_1_continuous_benchmark(record_criterion):
    v = continuous_merton_utility(0.07, 0.2, 0.5, 1.0, 1.0)
    oracle = float(mpmath.exp(mpmath.mpf("0.5") * mpmath.mpf("0.07") ** 2 / (2 * (1 - mpmath.mpf("0.5")) * mpmath.mpf("0.2") ** 2)))
    truncated = math.floor(v * 1e4) / 1e4
    ok = truncated == 1.0631 and abs(v - oracle) <= 1e-15
    record_criterion(1, ok, f"benchmark {v:.10f} (oracle {oracle:.10f}), 4-decimal truncation {truncated}")
    assert ok


def test_criterion_2_table1_reproduction(table1, record_criterion):
    parts, ok = [], True
    for N, target in PUBLISHED_L10.items():
        c = cell(table1, 10.0, N)
        z = (c["difference"] - target) / c["stderr"]
        ok &= abs(z) <= 3
        parts.append(f"N={N}: {c['difference']:.6g} (z={z:+.2f})")
    for L, target in PUBLISHED_N2.items():
        c = cell(table1, L, 2)
        rel = abs(c["difference"] / target - 1)
        ok &= rel <= 0.10
        parts.append(f"L={L:g},N=2: {c['difference']:.6g} ({100 * rel:.1f}% off)")
    record_criterion(2, ok, "; ".join(parts))
    assert ok


def test_criterion_3_convergence_trend(table1, record_criterion):
    col = [cell(table1, 10.0, N)["difference"] for N in sorted(PUBLISHED_L10)]
    decreasing = all(x > y for x, y in zip(col, col[1:]))
    bench = continuous_merton_utility(0.07, 0.2, 0.5, 1.0, 1.0)
    Ns = (100, 1000, 10000)
    gaps = [abs(bench - script_g_star(MarketParams.constant(0.07, 0.2, N), 0.5, Discretization(1.0, N), 1.0))
            for N in Ns]
    slope = np.polyfit(np.log([1.0 / N for N in Ns]), np.log(gaps), 1)[0]
    ok = decreasing and abs(slope - 1.0) <= 0.15
    record_criterion(3, ok, f"L=10 column strictly decreasing: {decreasing}; deterministic gap slope {slope:.4f}")
    assert ok


def _random_ito_draws(rng, count):
    draws = []
    while len(draws) < count:
        alpha = rng.uniform(0.1, 0.9)
        a = rng.uniform(-0.15, 0.15)
        b = rng.uniform(0.05, 0.5)
        u = rng.uniform(0.2, 5.0) * rng.choice([-1.0, 1.0])
        try:
            draws.append((u, a, b, alpha, ito_order_fit(u, a, b, alpha)))
        except StepSizeError:
            continue
    return draws


def test_criterion_4_ito_order(record_criterion):
    draws = _random_ito_draws(np.random.default_rng(4), 20)
    slopes = np.array([fit.slope for *_, fit in draws])
    spreads = []
    for u, _, b, _, fit in draws:
        r = fit.bound_ratios(u, b)
        spreads.append(r.max() / r.min())
    slope_ok = bool(np.all((slopes >= 1.3) & (slopes <= 1.7)))
    ratio_ok = max(spreads) <= 10
    ok = slope_ok and ratio_ok
    record_criterion(
        4, ok,
        f"remainder slopes in [{slopes.min():.3f}, {slopes.max():.3f}] (required [1.3, 1.7]); "
        f"max bound-ratio spread {max(spreads):.2f} (required <= 10)",
    )
    assert slope_ok, f"fitted slopes {np.round(slopes, 3)}"
    assert ratio_ok


def test_criterion_5_stationarity_and_maximality(record_criterion):
    rng = np.random.default_rng(5)
    grad_zero = hess_neg = mixed_zero = strict = True
    worst = -math.inf
    for _ in range(50):
        N = int(rng.integers(2, 60))
        alpha = rng.uniform(0.1, 0.9)
        a = rng.uniform(0.01, 0.15, N) * rng.choice([-1.0, 1.0], N)
        b = rng.uniform(0.1, 0.4, N)
        p, d = MarketParams(a, b), Discretization(1.0, N)
        ustar = merton_strategy(p, alpha, d)
        rep = script_g_derivatives(p, ustar, alpha, d, 1.0)
        grad_zero &= bool(np.all(rep.gradient == 0.0))
        hess_neg &= bool(np.all(rep.hessian_diag < 0))
        mixed_zero &= rep.max_offdiag == 0.0
        best = script_g(p, ustar, alpha, d, 1.0)
        tested = 0
        while tested < 500:
            # multiples of u* in (-1, 2) per coordinate; c in (0, 2) keeps every factor above 1
            c = rng.uniform(-1.0, 2.0, N)
            c[np.abs(c) < 1e-3] = 1e-3
            try:
                value = script_g(p, c * ustar.u, alpha, d, 1.0)
            except StepSizeError:
                continue
            tested += 1
            worst = max(worst, value - best)
            strict &= value < best
    ok = grad_zero and hess_neg and mixed_zero and strict
    record_criterion(
        5, ok,
        f"gradient exactly 0: {grad_zero}; Hessian diagonal negative: {hess_neg}; mixed partials 0: {mixed_zero}; "
        f"25000 random strategies strictly worse: {strict} (max G(u) - G(u*) = {worst:.3g})",
    )
    assert ok


def test_criterion_6_exact_vs_surrogate(record_criterion):
    Ns = (12, 52, 250)
    logs, gaps = [], []
    for N in Ns:
        p, d = MarketParams.constant(0.07, 0.2, N), Discretization(1.0, N)
        ustar = merton_strategy(p, 0.5, d)
        G, Gs = g_exact(p, ustar, 0.5, d, 1.0), script_g(p, ustar, 0.5, d, 1.0)
        logs.append(math.log(G / Gs))
        gaps.append(abs(G - Gs))
    sqrt_h = np.sqrt([1.0 / N for N in Ns])
    c = float(np.max(np.abs(logs) / sqrt_h))
    inside = all(abs(lg) <= c * s for lg, s in zip(logs, sqrt_h))
    slope = np.polyfit(np.log(sqrt_h), np.log(gaps), 1)[0]
    ok = inside and slope >= 0.45 and math.isfinite(c)
    record_criterion(6, ok, f"single c = {c:.3g} covers N in {Ns}: {inside}; |G - G_surrogate| slope vs sqrt(h) {slope:.3f}")
    assert ok


def test_criterion_7_positivity(record_criterion):
    table = cli.run_positivity(ExperimentConfig())
    agree, parts = True, []
    for N, exact, est, se in zip(table.column("N"), table.column("analytic"),
                                 table.column("mc_estimate"), table.column("stderr")):
        z_ok = abs(est - exact) <= 3 * se if se > 0 else abs(est - exact) <= 1e-6
        agree &= z_ok
        parts.append(f"N={N}: {exact:.6f} vs {est:.6f}")
    analytic = table.column("analytic")
    z = (1 + 0.5 * 3.5 * 0.07) / (math.sqrt(0.5) * 3.5 * 0.2)
    oracle = float(mpmath.ncdf(z) ** 2)
    n2_ok = abs(analytic[0] - oracle) <= 1e-12 and abs(analytic[0] / 0.9769 - 1) <= 2e-4
    ok = agree and n2_ok and analytic[-1] >= 1 - 1e-15 and analytic == sorted(analytic)
    record_criterion(7, ok, "; ".join(parts) + f"; N=2 oracle {oracle:.6f}")
    assert ok


def test_criterion_8_oracle_equivalence(record_criterion):
    ok, parts = True, []
    for N in (2, 12, 52, 250):
        p, d = MarketParams.constant(0.07, 0.2, N), Discretization(1.0, N)
        ustar = merton_strategy(p, 0.5, d)
        sample = simulate_terminal(p, ustar, d, 1.0, McConfig(1_000_000, seed=8))
        phi_est, m2_est = sample.phi_moment(0.5), sample.second_moment()
        G, m2 = g_exact(p, ustar, 0.5, d, 1.0), second_moment(p, ustar, d, 1.0)
        ok &= phi_est.within(G) and m2_est.within(m2)
        parts.append(f"N={N}: z_phi={(phi_est.mean - G) / phi_est.stderr:+.2f}, z_m2={(m2_est.mean - m2) / m2_est.stderr:+.2f}")
    p, d = MarketParams.constant(0.07, 0.2, 52), Discretization(1.0, 52)
    ustar = merton_strategy(p, 0.5, d)
    rec = simulate_terminal(p, ustar, d, 1.0, McConfig(10_000, seed=8)).wealth
    prod = np.array([wealth_product_form(p, ustar, d, 1.0, noise_stream(8, i, 52)) for i in range(10_000)])
    rel = float(np.max(np.abs(prod - rec) / np.abs(rec)))
    ok &= rel <= 1e-12
    record_criterion(8, ok, "; ".join(parts) + f"; product vs recursion max rel {rel:.2g}")
    assert ok


def test_criterion_9_determinism(table1, record_criterion):
    parallel = cli.run_table1(ExperimentConfig(workers=8))
    ok = parallel.to_csv() == table1.to_csv()
    record_criterion(9, ok, f"workers 1 vs 8 CSV byte-identical: {ok}")
    assert ok
