"""Experiment configuration: flat ``key = value`` text with ``#`` comments."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ModelError
from .market import MarketParams
from .utility import UtilitySpec

DEFAULT_SEED = 20240607


def _floats(text: str, name: str) -> tuple[float, ...]:
    try:
        values = tuple(float(t) for t in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"cannot parse {text!r} as numbers", name) from exc
    if not values:
        raise ConfigError("empty list", name)
    return values


def _ints(text: str, name: str) -> tuple[int, ...]:
    vals = _floats(text, name)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers, got {text!r}", name)
    return tuple(int(v) for v in vals)


def _scalar_or_list(text: str, name: str) -> float | tuple[float, ...]:
    vals = _floats(text, name)
    return vals[0] if len(vals) == 1 else vals


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of every experiment; defaults are the published experiment setup."""

    a: float | tuple[float, ...] = 0.07
    b: float | tuple[float, ...] = 0.2
    alpha: float = 0.5
    x0: float = 1.0
    T: float = 1.0
    L_list: tuple[float, ...] = (10.0, 1e2, 1e3, 1e5, 1e6)
    N_list: tuple[int, ...] = (2, 6, 12, 52, 250)
    paths: int = 1_000_000
    seed: int = DEFAULT_SEED
    workers: int = 1
    output: str | None = None
    h_grid: tuple[float, ...] = (1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4)
    fit_N_list: tuple[int, ...] = (100, 1000, 10000)
    u: float | None = None
    path_index: int = 0

    def __post_init__(self):
        if not self.L_list:
            raise ConfigError("must be nonempty", "L_list")
        if not self.N_list:
            raise ConfigError("must be nonempty", "N_list")
        if any(n < 1 for n in self.N_list):
            raise ConfigError("step counts must be positive", "N_list")
        if self.paths < 1:
            raise ConfigError("must be >= 1", "paths")
        if self.workers < 1:
            raise ConfigError("must be >= 1", "workers")
        if not (math.isfinite(self.x0) and self.x0 > 0):
            raise ConfigError("must be positive", "x0")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ConfigError("must be positive", "T")
        self._wrap("alpha", UtilitySpec, self.alpha, 1.0)
        for L in self.L_list:
            self._wrap("L_list", UtilitySpec, self.alpha, L)
        if self.is_constant:
            self._wrap("a", MarketParams.constant, self.a, self.b, 1)
        else:
            for n in self.N_list:
                self.market(n)

    @staticmethod
    def _wrap(name, fn, *args):
        try:
            return fn(*args)
        except ConfigError:
            raise
        except ModelError as exc:
            raise ConfigError(str(exc), name) from exc

    @property
    def is_constant(self) -> bool:
        return not isinstance(self.a, tuple) and not isinstance(self.b, tuple)

    def market(self, N: int) -> MarketParams:
        """Market coefficients for an ``N``-step run."""
        a = np.broadcast_to(np.asarray(self.a, dtype=float), (N,)) if not isinstance(self.a, tuple) else None
        b = np.broadcast_to(np.asarray(self.b, dtype=float), (N,)) if not isinstance(self.b, tuple) else None
        if a is None:
            if len(self.a) != N:
                raise ConfigError(f"has {len(self.a)} entries but N={N}", "a")
            a = np.asarray(self.a)
        if b is None:
            if len(self.b) != N:
                raise ConfigError(f"has {len(self.b)} entries but N={N}", "b")
            b = np.asarray(self.b)
        return self._wrap("a", MarketParams, a, b)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


_PARSERS = {
    "a": _scalar_or_list,
    "b": _scalar_or_list,
    "alpha": lambda t, n: _floats(t, n)[0],
    "x0": lambda t, n: _floats(t, n)[0],
    "T": lambda t, n: _floats(t, n)[0],
    "L_list": _floats,
    "N_list": _ints,
    "paths": lambda t, n: _ints(t, n)[0],
    "seed": lambda t, n: _ints(t, n)[0],
    "workers": lambda t, n: _ints(t, n)[0],
    "output": lambda t, n: t,
    "h_grid": _floats,
    "fit_N_list": _ints,
    "u": lambda t, n: _floats(t, n)[0],
    "path_index": lambda t, n: _ints(t, n)[0],
}


def parse_config(text: str) -> ExperimentConfig:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key", key)
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key", key)
        values[key] = _PARSERS[key](value, key)
    return ExperimentConfig(**values)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text)


def dump_config(cfg: ExperimentConfig) -> str:
    """Render a config back to the text format (round-trips through :func:`parse_config`)."""

    def fmt(v):
        if isinstance(v, tuple):
            return ", ".join(repr(x) for x in v)
        return repr(v) if not isinstance(v, str) else v

    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        lines.append(f"{f.name} = {fmt(v)}")
    return "\n".join(lines) + "\n"
