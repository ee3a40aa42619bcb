"""Exact one-step expectations ``E |1 + h u a + sqrt(h) u b xi|^alpha``.

Writing ``s = sqrt(h) u b`` and ``v0 = -(1 + h u a) / s`` the integrand is
``|s|^alpha |v - v0|^alpha`` times the normal density, so each side of the
kink is an integral with an algebraic endpoint weight.  Both sides go to
QUADPACK's QAWS rule, which integrates that weight exactly; the Gaussian
tails beyond ``|v| = TAIL_CUT`` are below the smallest double.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import integrate, special

from .analytic import _log_factors, surrogate_increments
from .errors import DegenerateError, InputError, QuadratureError
from .market import Controls, Discretization, MarketParams, controls_array

TAIL_CUT = 38.5
ABS_TOL = 1e-12
DEFAULT_H_GRID = (1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _density(v: float) -> float:
    return math.exp(-0.5 * v * v) / _SQRT_2PI


@dataclass(frozen=True)
class StepExpectation:
    value: float
    kink_location: float
    abs_error_bound: float


def _quad(f, lo: float, hi: float, **kw) -> tuple[float, float]:
    if hi <= lo:
        return 0.0, 0.0
    out = integrate.quad(f, lo, hi, epsabs=1e-15, epsrel=1e-14, limit=400, full_output=1, **kw)
    val, err, ier = out[0], out[1], (out[3] if len(out) > 3 else None)
    # ier 2 (roundoff) is tolerated: the returned err is checked by the caller
    if ier is not None and "roundoff" not in str(ier) and err > ABS_TOL:
        raise QuadratureError(f"quad failed on [{lo:.6g}, {hi:.6g}]: {ier}")
    return val, err


def _side(lo: float, hi: float, wvar: tuple[float, float]) -> tuple[float, float]:
    return _quad(_density, lo, hi, weight="alg", wvar=wvar)


def _smooth(f, lo: float, hi: float) -> tuple[float, float]:
    return _quad(f, lo, hi, points=[0.0])


@functools.lru_cache(maxsize=4096)
def _step_cached(u: float, a: float, b: float, h: float, alpha: float) -> StepExpectation:
    m = 1.0 + h * u * a
    s = math.sqrt(h) * u * b
    v0 = -m / s
    # xi -> -xi leaves the law unchanged, so work with |s| and the reflected kink
    sigma = abs(s)
    c = -m / sigma
    scale = sigma**alpha
    if c <= -TAIL_CUT:
        val, err = _smooth(lambda v: (m + sigma * v) ** alpha * _density(v), -TAIL_CUT, TAIL_CUT)
        value, err_sum = val, err
        scale = 1.0
    elif c >= TAIL_CUT:
        val, err = _smooth(lambda v: (-m - sigma * v) ** alpha * _density(v), -TAIL_CUT, TAIL_CUT)
        value, err_sum = val, err
        scale = 1.0
    else:
        right, err_r = _side(c, TAIL_CUT, (alpha, 0.0))
        left, err_l = _side(-TAIL_CUT, c, (0.0, alpha))
        value, err_sum = left + right, err_l + err_r
    # mass beyond the window; underflows to zero in double precision
    tail = 2.0 * (TAIL_CUT + abs(c) + 1.0) ** alpha * float(special.ndtr(-TAIL_CUT))
    bound = scale * err_sum + tail
    if not bound <= ABS_TOL:
        raise QuadratureError(
            f"error bound {bound:.3g} exceeds {ABS_TOL:g} (u={u}, a={a}, b={b}, h={h}, alpha={alpha})"
        )
    return StepExpectation(scale * value, v0, bound)


def step_expectation_phi(u: float, a: float, b: float, h: float, alpha: float) -> StepExpectation:
    """``E |1 + h u a + sqrt(h) u b xi|^alpha`` for a standard normal ``xi``.

    ``alpha`` may exceed one (e.g. 2 for the quadratic null check); the usual
    use is ``0 < alpha < 1``.
    """
    if not (h > 0 and math.isfinite(h)):
        raise InputError(f"h must be positive, got {h}")
    if not alpha > 0:
        raise InputError(f"alpha must be positive, got {alpha}")
    if u * b == 0:
        raise DegenerateError("u * b is zero; the step is deterministic")
    return _step_cached(float(u), float(a), float(b), float(h), float(alpha))


def g_exact(
    params: MarketParams,
    strat: Controls,
    alpha: float,
    disc: Discretization,
    x0: float,
) -> float:
    """``E |x_N|^alpha`` as ``x0^alpha`` times the product of step expectations."""
    u = controls_array(strat, disc.N)
    if params.N != disc.N:
        raise InputError(f"market has {params.N} steps, discretization has N={disc.N}")
    log_terms = np.zeros(disc.N)
    active = u != 0
    for n in np.flatnonzero(active):
        step = step_expectation_phi(u[n], params.a[n], params.b[n], disc.h, alpha)
        log_terms[n] = math.log(step.value)
    # u_n == 0 leaves the wealth unchanged: factor exactly 1
    return math.exp(alpha * math.log(x0) + math.fsum(log_terms))


def ito_remainder(u: float, a: float, b: float, alpha: float, h: float) -> float:
    """Signed gap between the exact step expectation and its second-order expansion."""
    if h == 0:
        return 0.0
    exact = step_expectation_phi(u, a, b, h, alpha).value
    return exact - (1.0 + float(surrogate_increments(u, a, b, alpha, h)))


@dataclass(frozen=True)
class RemainderFit:
    h_values: NDArray[np.float64]
    remainders: NDArray[np.float64]
    slope: float
    constant: float
    excluded: tuple[float, ...] = field(default=())

    def bound_ratios(self, u: float, b: float) -> NDArray[np.float64]:
        """``|remainder| / (h^1.5 u^2 b^2)`` per grid point."""
        return np.abs(self.remainders) / (self.h_values**1.5 * u * u * b * b)


def ito_order_fit(u: float, a: float, b: float, alpha: float, h_grid=DEFAULT_H_GRID) -> RemainderFit:
    """Fit ``log|remainder| = slope * log h + c`` over a decreasing step grid.

    ``constant`` is the smallest K with ``|remainder| <= K h^1.5 u^2 b^2`` on
    the grid.
    """
    h = np.asarray(h_grid, dtype=np.float64)
    if h.size < 5:
        raise InputError("need at least 5 grid points")
    if np.any(np.diff(h) >= 0):
        raise InputError("h grid must be strictly decreasing")
    # every surrogate factor on the grid must be positive
    _log_factors(surrogate_increments(u, a, b, alpha, h))
    rem = np.array([ito_remainder(u, a, b, alpha, float(hh)) for hh in h])
    keep = rem != 0
    excluded = tuple(float(x) for x in h[~keep])
    if keep.sum() < 2:
        raise InputError("fewer than two nonzero remainders; nothing to fit")
    slope, _ = np.polyfit(np.log(h[keep]), np.log(np.abs(rem[keep])), 1)
    constant = float(np.max(np.abs(rem) / (h**1.5 * u * u * b * b)))
    return RemainderFit(h, np.abs(rem), float(slope), constant, excluded)
