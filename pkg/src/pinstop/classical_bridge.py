"""Known-pinning case: closed-form value and boundary for a Brownian bridge pinned at ``a``."""
from __future__ import annotations

import numpy as np

from .core_math import SQRT_2PI, alpha, scaled_cdf
from .errors import DomainError


def _as_out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def check_time(t, *, allow_one: bool = False):
    t = np.asarray(t, dtype=float)
    bad = (t < 0.0) | (t > 1.0) if allow_one else (t < 0.0) | (t >= 1.0)
    if np.any(bad) or not np.all(np.isfinite(t)):
        rng = "[0, 1]" if allow_one else "[0, 1)"
        raise DomainError(f"time must lie in {rng}")
    return t


def boundary_b(t, a: float):
    """Stopping boundary a + alpha * sqrt(1 - t)."""
    t = check_time(t, allow_one=True)
    return _as_out(a + alpha() * np.sqrt(1.0 - t))


def value_known_pinning(t, x, a: float):
    """Value of optimally stopping a bridge pinned at ``a``, started from (t, x), t < 1."""
    t = check_time(t)
    x = np.asarray(x, dtype=float)
    al = alpha()
    s = 1.0 - t
    rs = np.sqrt(s)
    b = a + al * rs
    # y is clipped at alpha: the first branch is only selected below the boundary,
    # and the clip keeps the scaled CDF away from its overflow region.
    y = np.minimum((x - a) / rs, al)
    cont = a + SQRT_2PI * rs * (1.0 - al * al) * scaled_cdf(y)
    return _as_out(np.where(x < b, cont, x))


def policy_tau_b(t, x, a: float):
    """True where the known-pinning rule stops: x >= b(t), or at the horizon."""
    t = check_time(t, allow_one=True)
    x = np.asarray(x, dtype=float)
    stop = (t >= 1.0) | (x >= a + alpha() * np.sqrt(1.0 - t))
    return bool(stop) if stop.ndim == 0 else stop
