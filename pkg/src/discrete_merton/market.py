"""Market model types and the wealth / stock recursions.

Wealth evolves by the controlled difference equation

    x[n+1] = x[n] * (1 + h*u[n]*a[n] + sqrt(h)*u[n]*b[n]*xi[n+1])

and the stock by the same recursion with u == 1.  Negative wealth is not
absorbed; the recursion is applied at every step regardless of sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateError, InputError, InputShapeError


def _frozen(values: ArrayLike, name: str) -> NDArray[np.float64]:
    arr = np.array(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Discretization:
    """Uniform time grid with ``N`` steps over ``[0, T]``."""

    T: float
    N: int

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0):
            raise InputError(f"T must be positive and finite, got {self.T}")
        if int(self.N) != self.N or self.N < 1:
            raise InputError(f"N must be a positive integer, got {self.N}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self) -> float:
        return self.T / self.N

    @property
    def sqrt_h(self) -> float:
        return math.sqrt(self.h)


@dataclass(frozen=True)
class MarketParams:
    """Per-step drift ``a`` and volatility ``b`` with their magnitude bounds.

    ``bounds`` is ``(a_lo, a_hi, b_lo, b_hi)``.  When omitted it is taken from
    the data, so the only extra requirement is that no coefficient is zero.
    """

    a: NDArray[np.float64]
    b: NDArray[np.float64]
    bounds: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        a = _frozen(self.a, "a")
        b = _frozen(self.b, "b")
        if a.shape != b.shape:
            raise InputShapeError(f"a has {a.size} entries but b has {b.size}")
        if a.size == 0:
            raise InputShapeError("market coefficients are empty")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        bounds = self.bounds
        if bounds is None:
            bounds = (
                float(np.min(np.abs(a))),
                float(np.max(np.abs(a))),
                float(np.min(np.abs(b))),
                float(np.max(np.abs(b))),
            )
        a_lo, a_hi, b_lo, b_hi = (float(v) for v in bounds)
        if not (0 < a_lo <= a_hi and 0 < b_lo <= b_hi):
            raise InputError(f"market bounds must satisfy 0 < lo <= hi, got {bounds}")
        abs_a, abs_b = np.abs(a), np.abs(b)
        if np.any(abs_a < a_lo) or np.any(abs_a > a_hi):
            raise InputError(f"|a_n| outside [{a_lo}, {a_hi}]")
        if np.any(abs_b < b_lo) or np.any(abs_b > b_hi):
            raise InputError(f"|b_n| outside [{b_lo}, {b_hi}]")
        object.__setattr__(self, "bounds", (a_lo, a_hi, b_lo, b_hi))

    @classmethod
    def constant(cls, a: float, b: float, N: int) -> "MarketParams":
        return cls(np.full(N, float(a)), np.full(N, float(b)))

    @property
    def N(self) -> int:
        return self.a.size

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.a == self.a[0]) and np.all(self.b == self.b[0]))


@dataclass(frozen=True)
class Strategy:
    """Nonrandom investment ratios with ``u_lo <= |u_n| <= u_hi``."""

    u: NDArray[np.float64]
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        u = _frozen(self.u, "u")
        if u.size == 0:
            raise InputShapeError("strategy is empty")
        object.__setattr__(self, "u", u)
        bounds = self.bounds
        if bounds is None:
            bounds = (float(np.min(np.abs(u))), float(np.max(np.abs(u))))
        u_lo, u_hi = float(bounds[0]), float(bounds[1])
        if not 0 < u_lo <= u_hi:
            raise InputError(f"strategy bounds must satisfy 0 < u_lo <= u_hi, got {bounds}")
        abs_u = np.abs(u)
        if np.any(abs_u < u_lo) or np.any(abs_u > u_hi):
            raise InputError(f"|u_n| outside [{u_lo}, {u_hi}]")
        object.__setattr__(self, "bounds", (u_lo, u_hi))

    @classmethod
    def constant(cls, u: float, N: int, bounds: tuple[float, float] | None = None) -> "Strategy":
        return cls(np.full(N, float(u)), bounds)

    @property
    def N(self) -> int:
        return self.u.size


@dataclass(frozen=True)
class NoisePath:
    """One realisation of the ``N`` standard-normal shocks."""

    xi: NDArray[np.float64]

    def __post_init__(self):
        object.__setattr__(self, "xi", _frozen(self.xi, "noise"))


@dataclass(frozen=True)
class WealthPath:
    x: NDArray[np.float64]
    all_positive: bool = field(init=False)

    def __post_init__(self):
        x = _frozen(self.x, "wealth")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "all_positive", bool(np.all(x[1:] > 0)))

    @property
    def terminal(self) -> float:
        return float(self.x[-1])


# Raw mode: operations also take bare arrays so that degenerate controls
# (e.g. u == 0) can be pushed through the recursion for testing.
Controls = Union[Strategy, ArrayLike]
Noise = Union[NoisePath, ArrayLike]


def controls_array(strat: Controls, N: int) -> NDArray[np.float64]:
    u = strat.u if isinstance(strat, Strategy) else np.asarray(strat, dtype=np.float64).reshape(-1)
    if u.size != N:
        raise InputShapeError(f"strategy has {u.size} entries, expected N={N}")
    return u


def noise_array(noise: Noise, N: int) -> NDArray[np.float64]:
    if isinstance(noise, NoisePath):
        xi = noise.xi
    else:
        xi = np.asarray(noise, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(xi)):
            raise InputError("noise contains non-finite values")
    if xi.size != N:
        raise InputShapeError(f"noise has {xi.size} entries, expected N={N}")
    return xi


def _check_market(params: MarketParams, disc: Discretization) -> None:
    if params.N != disc.N:
        raise InputShapeError(f"market has {params.N} steps, discretization has N={disc.N}")


def _check_x0(x0: float) -> None:
    if not (math.isfinite(x0) and x0 > 0):
        raise InputError(f"x0 must be positive and finite, got {x0}")


def step_factors(h: float, sqrt_h: float, u, a, b, xi):
    """Per-step growth factors ``1 + h*u*a + sqrt(h)*u*b*xi``.

    Shared by every simulator so that the scalar and vectorised paths agree
    bit for bit.
    """
    return 1.0 + h * u * a + sqrt_h * u * b * xi


def simulate_path(
    params: MarketParams,
    strat: Controls,
    disc: Discretization,
    x0: float,
    noise: Noise,
) -> WealthPath:
    _check_market(params, disc)
    _check_x0(x0)
    u = controls_array(strat, disc.N)
    xi = noise_array(noise, disc.N)
    f = step_factors(disc.h, disc.sqrt_h, u, params.a, params.b, xi)
    x = np.empty(disc.N + 1)
    x[0] = x0
    for n in range(disc.N):
        x[n + 1] = x[n] * f[n]
    return WealthPath(x)


def wealth_product_form(
    params: MarketParams,
    strat: Controls,
    disc: Discretization,
    x0: float,
    noise: Noise,
) -> float:
    """Terminal wealth as ``x0`` times the product of all step factors."""
    _check_market(params, disc)
    _check_x0(x0)
    u = controls_array(strat, disc.N)
    xi = noise_array(noise, disc.N)
    return float(x0 * np.prod(step_factors(disc.h, disc.sqrt_h, u, params.a, params.b, xi)))


def simulate_stock(params: MarketParams, disc: Discretization, noise: Noise) -> NDArray[np.float64]:
    """Stock price path with ``s0 = 1``; prices may turn negative."""
    _check_market(params, disc)
    xi = noise_array(noise, disc.N)
    f = step_factors(disc.h, disc.sqrt_h, 1.0, params.a, params.b, xi)
    s = np.empty(disc.N + 1)
    s[0] = 1.0
    for n in range(disc.N):
        s[n + 1] = s[n] * f[n]
    return s


def check_self_financing(
    wealth: WealthPath | ArrayLike,
    stock: ArrayLike,
    strat: Controls,
) -> float:
    """Largest violation of ``x[n+1] - x[n] = gamma_n (s[n+1] - s[n])``.

    ``gamma_n = u_n x_n / s_n`` is the number of shares held over step n.
    """
    x = wealth.x if isinstance(wealth, WealthPath) else np.asarray(wealth, dtype=np.float64)
    s = np.asarray(stock, dtype=np.float64)
    if x.shape != s.shape:
        raise InputShapeError(f"wealth has {x.size} points but stock has {s.size}")
    u = controls_array(strat, x.size - 1)
    if np.any(s[:-1] == 0):
        n = int(np.flatnonzero(s[:-1] == 0)[0])
        raise DegenerateError(f"stock price is zero at rebalance step {n}")
    gamma = u * x[:-1] / s[:-1]
    violation = np.abs(np.diff(x) - gamma * np.diff(s))
    return float(np.max(violation))


def as_sequence(value: float | Sequence[float], N: int, name: str) -> NDArray[np.float64]:
    """Broadcast a scalar to ``N`` entries or validate a given sequence."""
    arr = np.atleast_1d(np.asarray(value, dtype=np.float64))
    if arr.size == 1:
        return np.full(N, float(arr[0]))
    if arr.size != N:
        raise InputShapeError(f"{name} has {arr.size} entries, expected N={N}")
    return arr
