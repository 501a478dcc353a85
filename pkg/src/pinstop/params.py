"""Problem-instance and configuration dataclasses."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ModelParams:
    """Pin/drift level ``a`` and prior probability ``pi`` that the path is a bridge."""

    a: float
    pi: float

    def __post_init__(self):
        object.__setattr__(self, "a", _finite("a", self.a))
        pi = _finite("pi", self.pi)
        if not 0.0 <= pi <= 1.0:
            raise ConfigError(f"pi must lie in [0, 1], got {pi}")
        object.__setattr__(self, "pi", pi)

    @property
    def odds(self) -> float:
        """Prior odds pi / (1 - pi); infinite when pi == 1."""
        if self.pi == 1.0:
            return math.inf
        return self.pi / (1.0 - self.pi)


@dataclass(frozen=True)
class TimeState:
    t: float
    x: float

    def __post_init__(self):
        object.__setattr__(self, "t", _finite("t", self.t))
        object.__setattr__(self, "x", _finite("x", self.x))


@dataclass(frozen=True)
class GridSpec:
    """Finite-difference grid: ``nx`` space nodes, ``nt`` time steps from 0 to ``t_cutoff``."""

    x_min: float = -7.0
    x_max: float = 7.0
    nx: int = 801
    nt: int = 800
    t_cutoff: float = 1.0 - 1e-4

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)) or self.x_min >= self.x_max:
            raise ConfigError("need finite x_min < x_max")
        if int(self.nx) != self.nx or self.nx < 3:
            raise ConfigError("nx must be an integer >= 3")
        if int(self.nt) != self.nt or self.nt < 2:
            raise ConfigError("nt must be an integer >= 2")
        if not 0.0 < self.t_cutoff < 1.0:
            raise ConfigError("t_cutoff must lie in (0, 1)")

    @classmethod
    def around(cls, a: float, *, nx: int = 801, nt: int = 800, eps: float = 1e-4,
               half_width: float | None = None) -> "GridSpec":
        """Default grid symmetric about 0 with half-width ``|a| + 6``."""
        w = abs(a) + 6.0 if half_width is None else half_width
        return cls(-w, w, nx, nt, 1.0 - eps)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    def covers(self, a: float, margin: float = 4.0) -> bool:
        return self.x_min <= a - margin and self.x_max >= a + margin


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo settings.

    With ``antithetic`` set, ``n_paths`` counts antithetic *pairs*, so
    ``2 * n_paths`` trajectories are simulated. ``time_grid`` is ``"sqrt"``
    (uniform in sqrt(1 - t), finer near the horizon) or ``"uniform"``.
    """

    n_paths: int = 100_000
    n_steps: int = 1000
    seed: int = 0
    antithetic: bool = True
    time_grid: str = "sqrt"

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ConfigError("n_paths must be an integer >= 1")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ConfigError("n_steps must be an integer >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.time_grid not in ("sqrt", "uniform"):
            raise ConfigError("time_grid must be 'sqrt' or 'uniform'")

    @property
    def total_paths(self) -> int:
        return 2 * self.n_paths if self.antithetic else self.n_paths
