"""Closed-form quantities of the discrete model.

Every N-fold product is evaluated as ``exp(sum(log1p(increment)))`` so that
long horizons neither overflow nor lose the small per-step increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import special

from .errors import DegenerateError, InputError, InputShapeError, StepSizeError
from .market import (
    Controls,
    Discretization,
    MarketParams,
    Strategy,
    controls_array,
)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")


def _check_shapes(params: MarketParams, disc: Discretization) -> None:
    if params.N != disc.N:
        raise InputShapeError(f"market has {params.N} steps, discretization has N={disc.N}")


def _merton_values(a: NDArray, b: NDArray, alpha: float) -> NDArray:
    if np.any(b == 0):
        n = int(np.flatnonzero(b == 0)[0])
        raise DegenerateError(f"volatility b_{n} is zero")
    return a / ((1.0 - alpha) * b * b)


def merton_strategy(params: MarketParams, alpha: float, disc: Discretization) -> Strategy:
    """Discretised Merton ratios ``u*_n = a_n / ((1 - alpha) b_n^2)``."""
    _check_alpha(alpha)
    _check_shapes(params, disc)
    return Strategy(_merton_values(params.a, params.b, alpha))


def surrogate_increments(u, a, b, alpha: float, h: float) -> NDArray:
    """``alpha*h*u*a + h*alpha*(alpha-1)/2 * u^2 b^2`` for each step."""
    return alpha * h * u * a + h * (alpha * (alpha - 1.0) / 2.0) * u * u * b * b


def _log_factors(incr: NDArray) -> NDArray:
    bad = np.flatnonzero(incr <= -1.0)
    if bad.size:
        n = int(bad[0])
        raise StepSizeError(
            f"surrogate factor at step {n} is {1.0 + incr[n]:.6g} <= 0; step size too large",
            index=n,
        )
    return np.log1p(incr)


def script_g(
    params: MarketParams,
    strat: Controls,
    alpha: float,
    disc: Discretization,
    x0: float,
) -> float:
    """Deterministic surrogate ``x0^alpha * prod(1 + increment_n)``."""
    _check_alpha(alpha)
    _check_shapes(params, disc)
    u = controls_array(strat, disc.N)
    incr = surrogate_increments(u, params.a, params.b, alpha, disc.h)
    return math.exp(alpha * math.log(x0) + math.fsum(_log_factors(incr)))


def script_g_star(params: MarketParams, alpha: float, disc: Discretization, x0: float) -> float:
    """Surrogate at the Merton ratios, ``x0^alpha * prod(1 + alpha h a^2 / (2(1-alpha) b^2))``."""
    _check_alpha(alpha)
    _check_shapes(params, disc)
    a, b = params.a, params.b
    if np.any(b == 0):
        raise DegenerateError("volatility is zero")
    incr = alpha * disc.h * a * a / (2.0 * (1.0 - alpha) * b * b)
    return math.exp(alpha * math.log(x0) + math.fsum(_log_factors(incr)))


@dataclass(frozen=True)
class StationarityReport:
    gradient: NDArray[np.float64]
    hessian_diag: NDArray[np.float64]
    max_offdiag: float

    @property
    def max_gradient(self) -> float:
        return float(np.max(np.abs(self.gradient)))


def stationarity_residual(u: NDArray, a: NDArray, b: NDArray, alpha: float) -> NDArray:
    """``a_k + (alpha-1) u_k b_k^2`` written as ``(1-alpha) b_k^2 (u*_k - u_k)``.

    The factored form vanishes exactly wherever ``u_k`` equals the Merton
    ratio computed by :func:`merton_strategy`.
    """
    return (1.0 - alpha) * b * b * (_merton_values(a, b, alpha) - u)


def script_g_derivatives(
    params: MarketParams,
    strat: Controls,
    alpha: float,
    disc: Discretization,
    x0: float,
) -> StationarityReport:
    """Gradient, Hessian diagonal and largest mixed partial of the surrogate."""
    _check_alpha(alpha)
    _check_shapes(params, disc)
    u = controls_array(strat, disc.N)
    a, b, h = params.a, params.b, disc.h
    log_f = _log_factors(surrogate_increments(u, a, b, alpha, h))
    log_scale = alpha * math.log(x0) + math.fsum(log_f)
    # product over n != k, one entry per k
    others = np.exp(log_scale - log_f)
    resid = stationarity_residual(u, a, b, alpha)
    gradient = alpha * h * resid * others
    hessian_diag = alpha * h * (alpha - 1.0) * b * b * others
    if disc.N < 2:
        max_offdiag = 0.0
    else:
        # |d2G/du_k du_j| = alpha^2 h^2 |r_k r_j| * scale / (f_k f_j)
        w = np.abs(resid) * np.exp(-log_f)
        top = np.sort(w)[-2:]
        max_offdiag = float(alpha * alpha * h * h * top[0] * top[1] * math.exp(log_scale))
    return StationarityReport(gradient, hessian_diag, max_offdiag)


def continuous_merton_utility(a: float, b: float, alpha: float, T: float, x0: float) -> float:
    """Expected power utility of the continuous-time Merton portfolio.

    ``x0^alpha * exp(alpha a^2 T / (2 (1-alpha) b^2))``.
    """
    _check_alpha(alpha)
    if b == 0:
        raise DegenerateError("volatility b is zero")
    return x0**alpha * math.exp(alpha * a * a * T / (2.0 * (1.0 - alpha) * b * b))


def second_moment(params: MarketParams, strat: Controls, disc: Discretization, x0: float) -> float:
    """Exact ``E x_N^2 = x0^2 prod(1 + h(2ua + h u^2 a^2 + u^2 b^2))``."""
    _check_shapes(params, disc)
    u = controls_array(strat, disc.N)
    a, b, h = params.a, params.b, disc.h
    incr = h * (2.0 * u * a + h * u * u * a * a + u * u * b * b)
    return math.exp(2.0 * math.log(x0) + math.fsum(np.log1p(incr)))


def normal_cdf(x):
    """Standard normal distribution function (erfc based, accurate in both tails)."""
    return special.ndtr(x)


def positivity_probability(params: MarketParams, strat: Controls, disc: Discretization) -> float:
    """Probability that every step factor, hence every wealth value, stays positive."""
    _check_shapes(params, disc)
    u = controls_array(strat, disc.N)
    ub = u * params.b
    if np.any(ub == 0):
        n = int(np.flatnonzero(ub == 0)[0])
        raise DegenerateError(f"u_{n} * b_{n} is zero")
    z = (1.0 + disc.h * u * params.a) / (disc.sqrt_h * np.abs(ub))
    return math.exp(math.fsum(special.log_ndtr(z)))


def mills_bounds(x: float) -> tuple[float, float]:
    """Lower and upper Mill's-ratio bounds on ``1 - Phi(x)`` for ``x > 0``."""
    if x <= 0:
        raise InputError("Mill's bounds need x > 0")
    g = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return x / (1.0 + x * x) * g, g / x
