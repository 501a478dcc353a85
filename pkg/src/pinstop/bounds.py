"""Computable upper and lower bounds on V(t, x, pi) for any pin level a.

Both bounds mix the known-pinning value with a drifted-Brownian term using
the posterior weight. The lower bound's P_0 term, E_0[X at tau_b ^ horizon],
needs the mean first-passage time of driftless Brownian motion over a moving
boundary. It is estimated by Monte Carlo.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import rng
from .belief import posterior_value
from .classical_bridge import boundary_b, check_time, value_known_pinning
from .core_math import alpha
from .params import MCConfig, ModelParams

TAG_PASSAGE = 4
BATCH = 1 << 15
DEFAULT_MC = MCConfig(n_paths=200_000, n_steps=400)


@dataclass(frozen=True)
class BoundPair:
    lower: float
    lower_stderr: float
    upper: float

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def upper_bound(t: float, x: float, p: ModelParams) -> float:
    """(1 - Pi)(x + max(a, 0)) + Pi V_1^a(t, x)."""
    check_time(t)
    post = float(posterior_value(t, x, p))
    if post == 1.0:
        return float(value_known_pinning(t, x, p.a))
    return (1.0 - post) * (x + max(p.a, 0.0)) + post * float(value_known_pinning(t, x, p.a))


@njit(cache=True, nogil=True)
def _passage_kernel(seed, lo_idx, antithetic, s_grid, c, out):
    # out[j] = E[min(tau, S) | sampled skeleton], tau = first touch of W over c(s).
    # Between skeleton points the touch probability of the Brownian bridge
    # against the chord of c is exact, so the conditional survival is a product.
    n = s_grid.size - 1
    for j in range(out.size):
        i = lo_idx + j
        if antithetic:
            stream = i // 2
            sign = 1.0 if i % 2 == 0 else -1.0
        else:
            stream = i
            sign = 1.0
        w = 0.0
        surv = 1.0
        acc = 0.0
        z0 = z1 = z2 = z3 = 0.0
        for k in range(n):
            q = k % 4
            if q == 0:
                z0, z1, z2, z3 = rng.normal4(seed, stream, TAG_PASSAGE, k // 4)
            z = z0 if q == 0 else (z1 if q == 1 else (z2 if q == 2 else z3))
            h = s_grid[k + 1] - s_grid[k]
            w1 = w + math.sqrt(h) * z * sign
            e0 = c[k] - w
            e1 = c[k + 1] - w1
            if e1 <= 0.0:
                acc += surv * h * (e0 / (e0 - e1))
                surv = 0.0
                break
            p = math.exp(-2.0 * e0 * e1 / h)
            acc += surv * h * (1.0 - 0.5 * p)
            surv *= 1.0 - p
            if surv < 1e-300:
                break
            w = w1
        out[j] = acc


def passage_grid(t: float, x: float, a: float, n_steps: int):
    """Skeleton times s in [0, 1 - t], refined towards the horizon, and c(s) there."""
    horizon = 1.0 - t
    u = np.linspace(0.0, 1.0, n_steps + 1)
    s = horizon * (1.0 - (1.0 - u) ** 2)
    s[-1] = horizon
    c = a * (1.0 - s) - x + alpha() * np.sqrt(np.maximum(horizon - s, 0.0))
    return s, c


def mean_passage_time(t: float, x: float, a: float, mc: MCConfig):
    """(estimate, stderr) of E_0[min(tau_b, 1 - t)] for the drifted path started at (t, x)."""
    check_time(t)
    if x >= boundary_b(t, a):
        return 0.0, 0.0
    s, c = passage_grid(t, x, a, mc.n_steps)
    out = np.empty(mc.total_paths)
    for lo in range(0, mc.total_paths, BATCH):
        hi = min(lo + BATCH, mc.total_paths)
        _passage_kernel(np.uint64(mc.seed), lo, mc.antithetic, s, c, out[lo:hi])
    if mc.antithetic:
        out = 0.5 * (out[0::2] + out[1::2])
    n = out.size
    m = math.fsum(out) / n
    se = math.sqrt(math.fsum((out - m) ** 2) / (n - 1) / n) if n > 1 else math.nan
    return m, se


@functools.lru_cache(maxsize=256)
def _mean_stopped_cached(t, x, a, mc):
    m, se = mean_passage_time(t, x, a, mc)
    return x + a * m, abs(a) * se


def mean_stopped_value_p0(t: float, x: float, a: float, mc: MCConfig | None = None):
    """(estimate, stderr) of E_0[X stopped at tau_b or the horizon] = x + a E_0[min(tau_b, 1 - t)]."""
    check_time(t)
    if a == 0.0 or x >= boundary_b(t, a):
        return float(x), 0.0
    return _mean_stopped_cached(float(t), float(x), float(a), mc or DEFAULT_MC)


def lower_bound(t: float, x: float, p: ModelParams, mc: MCConfig | None = None) -> BoundPair:
    """Lower bound (1 - Pi) E_0[...] + Pi V_1^a together with its MC error and the upper bound."""
    check_time(t)
    up = upper_bound(t, x, p)
    post = float(posterior_value(t, x, p))
    v1 = float(value_known_pinning(t, x, p.a))
    if post == 1.0:
        return BoundPair(v1, 0.0, v1)
    if p.a == 0.0:
        # the bounds coincide; take the same number for both sides
        return BoundPair(up, 0.0, up)
    m, se = mean_stopped_value_p0(t, x, p.a, mc)
    return BoundPair((1.0 - post) * m + post * v1, (1.0 - post) * se, up)
