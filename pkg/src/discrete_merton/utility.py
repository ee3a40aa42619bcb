"""Adjusted power utility and its even extension."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import InputError


@dataclass(frozen=True)
class UtilitySpec:
    """``U(x) = x**alpha`` for ``x >= 0`` and ``U(x) = L*x`` below zero."""

    alpha: float
    L: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (math.isfinite(self.L) and self.L > 0):
            raise InputError(f"L must be positive and finite, got {self.L}")


def _power(x: np.ndarray, alpha: float) -> np.ndarray:
    # exp(alpha*log x) with an exact zero at the kink
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(alpha * np.log(x[pos]))
    return out


def _checked(x: ArrayLike) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InputError("utility argument contains non-finite values")
    return arr


def _unwrap(out: np.ndarray, x):
    return float(out) if np.ndim(x) == 0 else out


def utility(x: ArrayLike, spec: UtilitySpec):
    """Evaluate the adjusted utility elementwise."""
    arr = _checked(x)
    out = np.where(arr < 0, spec.L * arr, _power(np.abs(arr), spec.alpha))
    return _unwrap(out, x)


def phi(x: ArrayLike, alpha: float):
    """``|x|**alpha``, the even extension of the power branch."""
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    arr = _checked(x)
    return _unwrap(_power(np.abs(arr), alpha), x)
