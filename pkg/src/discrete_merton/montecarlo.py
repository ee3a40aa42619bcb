"""Deterministic Monte Carlo over the wealth recursion.

Noise is counter based: every draw is a pure function of
``(seed, path_index, step)`` (SplitMix64 finaliser on a per-path key, then
the normal inverse CDF of the top 53 bits), so results never depend on how
paths are scheduled.  Within a path the N shocks are assembled as

    xi_k = Z / sqrt(N) + (eta_k - mean(eta))

from keyed draws ``eta_1..eta_N`` and one endpoint draw ``Z``.  The vector is
exactly i.i.d. N(0, 1) for any N, and ``sqrt(h) * sum(xi) = sqrt(T) * Z`` is
shared by every N, so runs at different step counts see the same Brownian
endpoint path by path.

Sums are accumulated with :func:`math.fsum`, which is exactly rounded, so
estimates are bit-identical for any chunking or worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import special

from .errors import InputError
from .market import (
    Controls,
    Discretization,
    MarketParams,
    NoisePath,
    controls_array,
    step_factors,
)
from .utility import UtilitySpec, phi, utility

CHUNK = 8192
ENDPOINT_STEP = 1 << 40

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(z: NDArray[np.uint64]) -> NDArray[np.uint64]:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _path_keys(seed: int, paths: NDArray[np.int64]) -> NDArray[np.uint64]:
    with np.errstate(over="ignore"):
        base = _mix(np.array([seed & _MASK64], dtype=np.uint64) + _GOLDEN)
        return _mix(base ^ paths.astype(np.uint64))


def keyed_normals(seed: int, paths: NDArray[np.int64], steps: NDArray[np.int64]) -> NDArray[np.float64]:
    """Standard normals indexed by ``(path, step)``; shape ``(len(paths), len(steps))``."""
    keys = _path_keys(seed, np.asarray(paths, dtype=np.int64))
    ctr = (np.asarray(steps, dtype=np.int64).astype(np.uint64) + np.uint64(1))
    with np.errstate(over="ignore"):
        z = _mix(keys[:, None] + ctr[None, :] * _GOLDEN)
    u = ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return special.ndtri(u)


def noise_matrix(seed: int, first_path: int, n_paths: int, N: int) -> NDArray[np.float64]:
    """Shocks for paths ``first_path .. first_path + n_paths - 1``, shape ``(n_paths, N)``."""
    paths = np.arange(first_path, first_path + n_paths, dtype=np.int64)
    eta = keyed_normals(seed, paths, np.arange(N, dtype=np.int64))
    endpoint = keyed_normals(seed, paths, np.array([ENDPOINT_STEP], dtype=np.int64))[:, 0]
    # fixed left-to-right accumulation keeps every row's mean reproducible
    total = np.zeros(n_paths)
    for k in range(N):
        total += eta[:, k]
    centred = eta - (total / N)[:, None]
    return (endpoint / math.sqrt(N))[:, None] + centred


def noise_stream(seed: int, path_index: int, N: int) -> NoisePath:
    if N < 1:
        raise InputError(f"N must be positive, got {N}")
    return NoisePath(noise_matrix(seed, path_index, 1, N)[0])


@dataclass(frozen=True)
class McConfig:
    paths: int
    seed: int = 20240607
    workers: int = 1

    def __post_init__(self):
        if self.paths < 1:
            raise InputError(f"paths must be >= 1, got {self.paths}")
        if self.workers < 1:
            raise InputError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    paths: int
    seed: int

    def within(self, target: float, k: float = 3.0) -> bool:
        return abs(self.mean - target) <= k * self.stderr


def estimate_from_samples(values: NDArray[np.float64], seed: int) -> Estimate:
    """Sample mean and standard error using exactly rounded sums."""
    n = values.size
    s1 = math.fsum(values)
    mean = s1 / n
    if n < 2:
        return Estimate(mean, 0.0, n, seed)
    s2 = math.fsum(values * values)
    var = max((s2 - s1 * s1 / n) / (n - 1), 0.0)
    if np.all(values == values[0]):
        var = 0.0
    return Estimate(mean, math.sqrt(var / n), n, seed)


@dataclass(frozen=True)
class TerminalSample:
    """Terminal wealth and path positivity for every simulated path.

    Kept so that several utilities (e.g. an L sweep) are evaluated on the
    same paths.
    """

    wealth: NDArray[np.float64]
    positive: NDArray[np.bool_]
    seed: int

    @property
    def paths(self) -> int:
        return self.wealth.size

    def expected_utility(self, spec: UtilitySpec) -> Estimate:
        return estimate_from_samples(np.asarray(utility(self.wealth, spec)), self.seed)

    def phi_moment(self, alpha: float) -> Estimate:
        return estimate_from_samples(np.asarray(phi(self.wealth, alpha)), self.seed)

    def second_moment(self) -> Estimate:
        return estimate_from_samples(self.wealth * self.wealth, self.seed)

    def positivity(self) -> Estimate:
        return estimate_from_samples(self.positive.astype(np.float64), self.seed)

    def negative_mass(self) -> float:
        """Sample mean of ``|x_N| 1{x_N < 0}``."""
        return math.fsum(np.where(self.wealth < 0, -self.wealth, 0.0)) / self.paths


def _simulate_chunk(u, a, b, disc: Discretization, x0: float, seed: int, start: int, count: int):
    xi = noise_matrix(seed, start, count, disc.N)
    f = step_factors(disc.h, disc.sqrt_h, u[None, :], a[None, :], b[None, :], xi)
    x = np.full(count, float(x0))
    positive = np.ones(count, dtype=bool)
    for n in range(disc.N):
        x *= f[:, n]
        positive &= x > 0
    return x, positive


def simulate_terminal(
    params: MarketParams,
    strat: Controls,
    disc: Discretization,
    x0: float,
    mc: McConfig,
) -> TerminalSample:
    """Run the recursion on ``mc.paths`` paths and keep only terminal values."""
    if params.N != disc.N:
        raise InputError(f"market has {params.N} steps, discretization has N={disc.N}")
    if not x0 > 0:
        raise InputError(f"x0 must be positive, got {x0}")
    u = controls_array(strat, disc.N)
    wealth = np.empty(mc.paths)
    positive = np.empty(mc.paths, dtype=bool)
    starts = range(0, mc.paths, CHUNK)

    def run(start: int) -> None:
        count = min(CHUNK, mc.paths - start)
        x, pos = _simulate_chunk(u, params.a, params.b, disc, x0, mc.seed, start, count)
        wealth[start:start + count] = x
        positive[start:start + count] = pos

    if mc.workers == 1:
        for s in starts:
            run(s)
    else:
        with ThreadPoolExecutor(max_workers=mc.workers) as pool:
            list(pool.map(run, starts))
    return TerminalSample(wealth, positive, mc.seed)


def estimate_expected_utility(params, strat, disc, x0, uspec: UtilitySpec, mc: McConfig) -> Estimate:
    return simulate_terminal(params, strat, disc, x0, mc).expected_utility(uspec)


def estimate_positivity(params, strat, disc, x0, mc: McConfig) -> Estimate:
    return simulate_terminal(params, strat, disc, x0, mc).positivity()


def estimate_phi_moment(params, strat, disc, x0, alpha: float, mc: McConfig) -> Estimate:
    return simulate_terminal(params, strat, disc, x0, mc).phi_moment(alpha)


def estimate_second_moment(params, strat, disc, x0, mc: McConfig) -> Estimate:
    return simulate_terminal(params, strat, disc, x0, mc).second_moment()
