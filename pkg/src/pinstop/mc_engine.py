"""Exact-law path simulation under P_pi and Monte Carlo evaluation of stopping rules.

Each trajectory draws its model indicator theta from the embedded belief
Pi(t0, x0, pi). It then advances with exact Gaussian transitions: drifted
Brownian increments when theta = 0, and Brownian-bridge conditional
increments towards the pin when theta = 1. Random numbers come from
counter-based streams keyed by (seed, pair index). Results are therefore
bit-identical under any batch or thread partition.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from numba import njit

from . import rng
from .belief import posterior_value
from .classical_bridge import boundary_b, check_time, policy_tau_b
from .errors import ConfigError
from .params import MCConfig, ModelParams, TimeState

TAG_THETA = 0
TAG_STEP = 1
TAG_FILTER = 2
TAG_CROSS = 3
BATCH = 1 << 15


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("PINSTOP_THREADS", "1")))
    except ValueError:
        return 1


def time_grid(t0: float, n_steps: int, kind: str = "sqrt") -> np.ndarray:
    """Monitoring times from t0 to 1 inclusive."""
    u = np.linspace(0.0, 1.0, n_steps + 1)
    if kind == "uniform":
        t = t0 + (1.0 - t0) * u
    else:
        t = 1.0 - (1.0 - t0) * (1.0 - u) ** 2
    t[0], t[-1] = t0, 1.0
    return t


@dataclass(frozen=True)
class PathRecord:
    theta: int
    times: np.ndarray
    x: np.ndarray
    belief: np.ndarray


@dataclass(frozen=True)
class PolicyRule:
    """Stopping rule as a vectorised predicate ``stop(t, x_array) -> bool_array``.

    A forced stop at t = 1 is always added by the evaluator.
    """

    name: str
    stop: Callable[[float, np.ndarray], np.ndarray]
    # optional: grid -> (lo, hi), each (n,) or (n, K), meaning "stop at grid[k]
    # iff lo[k, m] <= x <= hi[k, m] for some m" (inf-padded); when present
    # the evaluator uses a compiled per-path kernel
    intervals: Callable[[np.ndarray], tuple] | None = None


@dataclass(frozen=True)
class EvalResult:
    mean: float
    stderr: float
    n: int  # independent samples behind stderr (pairs when antithetic)


def _const(lo, hi):
    return lambda g: (np.full(g.size, lo), np.full(g.size, hi))


def stop_now() -> PolicyRule:
    return PolicyRule("now", lambda t, x: np.ones(x.shape, dtype=bool), _const(-np.inf, np.inf))


def never_stop() -> PolicyRule:
    return PolicyRule("never", lambda t, x: np.zeros(x.shape, dtype=bool), _const(np.inf, np.inf))


def tau_b_rule(a: float) -> PolicyRule:
    def intervals(g):
        lo = boundary_b(np.minimum(g, 1.0), a)
        return np.asarray(lo, dtype=float), np.full(g.size, np.inf)

    return PolicyRule(f"tau_b(a={a:g})", lambda t, x: policy_tau_b(t, x, a), intervals)


def interval_rule(times, lower, upper, name: str = "boundary") -> PolicyRule:
    """Stop when lower(t) <= x <= upper(t) for some tabulated interval.

    ``lower``/``upper`` have shape (T,) or (T, K) for K intervals per slice.
    NaN lower marks an absent interval; NaN upper means unbounded above
    (-inf lower is allowed for unbounded below). The boundary at time t is
    read from the latest tabulated slice <= t; before the first one nothing stops.
    """
    times = np.asarray(times, dtype=float)
    order = np.argsort(times)
    times = times[order]
    lower = np.asarray(lower, dtype=float).reshape(times.size, -1)[order]
    upper = np.asarray(upper, dtype=float).reshape(times.size, -1)[order]
    lo_tab = np.where(np.isnan(lower), np.inf, lower)
    hi_tab = np.where(np.isnan(upper), np.inf, upper)

    def intervals(g):
        k = np.searchsorted(times, g, side="right") - 1
        kk = np.clip(k, 0, times.size - 1)
        lo = np.where((k < 0)[:, None], np.inf, lo_tab[kk])
        return lo, hi_tab[kk]

    def stop(t, x):
        lo, hi = intervals(np.array([t]))
        return np.any((x[..., None] >= lo[0]) & (x[..., None] <= hi[0]), axis=-1)

    return PolicyRule(name, stop, intervals)


def _stream_ids(lo: int, hi: int, antithetic: bool):
    idx = np.arange(lo, hi, dtype=np.int64)
    if antithetic:
        return idx // 2, np.where(idx % 2 == 0, 1.0, -1.0)
    return idx, np.ones(idx.size)


def _draw_theta(p: ModelParams, start: TimeState, mc: MCConfig, streams, signs) -> np.ndarray:
    pi0 = float(posterior_value(start.t, start.x, p))
    u = rng.uniform_block(mc.seed, streams, TAG_THETA, 0)[:, 0]
    u = np.where(signs > 0, u, 1.0 - u)
    return u < pi0


def _check(start: TimeState):
    if not start.t < 1.0:
        raise ConfigError("simulation start time must be < 1")


class _Stepper:
    """Advances a set of trajectories one monitoring interval at a time."""

    def __init__(self, p, mc, grid, streams, signs, theta, x0):
        self.a = p.a
        self.seed = mc.seed
        self.grid = grid
        self.streams = streams
        self.signs = signs
        self.theta = theta
        self.x = np.full(streams.size, x0)
        self.buf = None

    def keep(self, mask):
        self.streams = self.streams[mask]
        self.signs = self.signs[mask]
        self.theta = self.theta[mask]
        self.x = self.x[mask]
        if self.buf is not None:
            self.buf = self.buf[mask]

    def step(self, k: int):
        if k % 4 == 0:
            self.buf = rng.normal_block(self.seed, self.streams, TAG_STEP, k // 4)
        z = self.buf[:, k % 4] * self.signs
        t0, t1 = self.grid[k], self.grid[k + 1]
        h = t1 - t0
        free = self.x + self.a * h + math.sqrt(h) * z
        if t1 >= 1.0:
            bridge = np.full_like(self.x, self.a)
        else:
            r = h / (1.0 - t0)
            bridge = self.x + (self.a - self.x) * r + math.sqrt(h * (1.0 - t1) / (1.0 - t0)) * z
        self.x = np.where(self.theta, bridge, free)


def _batches(total: int, batch: int):
    return [(lo, min(lo + batch, total)) for lo in range(0, total, batch)]


def _run_batches(fn, total: int, batch: int):
    jobs = _batches(total, batch)
    n = thread_count()
    if n == 1 or len(jobs) == 1:
        return [fn(lo, hi) for lo, hi in jobs]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(lambda j: fn(*j), jobs))


def simulate_arrays(p: ModelParams, start: TimeState, mc: MCConfig):
    """Full trajectories: returns (times, theta[n], x[n, m+1], belief[n, m+1])."""
    _check(start)
    grid = time_grid(start.t, mc.n_steps, mc.time_grid)

    def run(lo, hi):
        streams, signs = _stream_ids(lo, hi, mc.antithetic)
        theta = _draw_theta(p, start, mc, streams, signs)
        st = _Stepper(p, mc, grid, streams, signs, theta, start.x)
        xs = np.empty((hi - lo, grid.size))
        xs[:, 0] = start.x
        for k in range(mc.n_steps):
            st.step(k)
            xs[:, k + 1] = st.x
        return theta, xs

    parts = _run_batches(run, mc.total_paths, BATCH)
    theta = np.concatenate([q[0] for q in parts])
    xs = np.concatenate([q[1] for q in parts])
    return grid, theta.astype(int), xs, belief_along(p, grid, xs)


def belief_along(p: ModelParams, times: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Closed-form posterior at each recorded (t, x).

    At t = 1 the limit is used: belief 1 on paths sitting at the pin (to
    1e-9), 0 elsewhere, unless the prior is degenerate.
    """
    out = np.empty_like(xs)
    inner = times < 1.0
    out[:, inner] = posterior_value(times[inner][None, :], xs[:, inner], p)
    if not inner[-1]:
        if p.pi in (0.0, 1.0):
            out[:, -1] = p.pi
        else:
            out[:, -1] = (np.abs(xs[:, -1] - p.a) <= 1e-9).astype(float)
    return out


def simulate(p: ModelParams, start: TimeState, mc: MCConfig) -> Iterator[PathRecord]:
    times, theta, xs, belief = simulate_arrays(p, start, mc)
    for i in range(xs.shape[0]):
        yield PathRecord(int(theta[i]), times, xs[i], belief[i])


@njit(cache=True, inline="always")
def _inside(x, low, high, k):
    for m in range(low.shape[1]):
        if x >= low[k, m] and x <= high[k, m]:
            return True
    return False


@njit(cache=True, nogil=True)
def _interval_kernel(seed, lo_idx, antithetic, pi0, a, x0, grid, low, high, bridge_fix, out):
    # low/high: (n + 1, K); stop at t_k iff low[k, m] <= x <= high[k, m] for some m
    n = grid.size - 1
    K = low.shape[1]
    for j in range(out.size):
        i = lo_idx + j
        if antithetic:
            stream = i // 2
            sign = 1.0 if i % 2 == 0 else -1.0
        else:
            stream = i
            sign = 1.0
        u = rng.uniform0(seed, stream, TAG_THETA, 0)
        if sign < 0:
            u = 1.0 - u
        pinned = u < pi0
        x = x0
        z0 = z1 = z2 = z3 = 0.0
        for k in range(n):
            if _inside(x, low, high, k):
                break
            q = k % 4
            if q == 0:
                z0, z1, z2, z3 = rng.normal4(seed, stream, TAG_STEP, k // 4)
            z = z0 if q == 0 else (z1 if q == 1 else (z2 if q == 2 else z3))
            z *= sign
            t0 = grid[k]
            t1 = grid[k + 1]
            h = t1 - t0
            if pinned:
                if t1 >= 1.0:
                    x1 = a
                else:
                    x1 = x + (a - x) * (h / (1.0 - t0)) + math.sqrt(h * (1.0 - t1) / (1.0 - t0)) * z
            else:
                x1 = x + a * h + math.sqrt(h) * z
            if bridge_fix:
                # continuous monitoring between grid points: entering a stop
                # interval means touching its nearest edge first, either visibly
                # (x1 at or beyond it) or within the step (bridge touch
                # probability against the edge's chord)
                e0 = -1.0
                e1 = 0.0
                l0 = 0.0
                l1 = 0.0
                best = math.inf
                for m in range(K):
                    if not (low[k + 1, m] < math.inf and low[k, m] < math.inf):
                        continue
                    if x < low[k, m] and low[k, m] - x < best:
                        best = low[k, m] - x
                        e0, e1, l0, l1 = best, low[k + 1, m] - x1, low[k, m], low[k + 1, m]
                    elif x > high[k, m] and high[k, m] < math.inf and high[k + 1, m] < math.inf \
                            and x - high[k, m] < best:
                        best = x - high[k, m]
                        e0, e1, l0, l1 = best, x1 - high[k + 1, m], high[k, m], high[k + 1, m]
                if e0 > 0.0:
                    if e1 <= 0.0:
                        x = l0 + (l1 - l0) * (e0 / (e0 - e1))
                        break
                    hit = math.exp(-2.0 * e0 * e1 / h)
                    if hit > 1e-15 and rng.uniform0(seed, stream, TAG_CROSS, k) < hit:
                        x = 0.5 * (l0 + l1)
                        break
            x = x1
        out[j] = x


def stopped_values(rule: PolicyRule, p: ModelParams, start: TimeState, mc: MCConfig,
                   bridge_fix: bool = True) -> np.ndarray:
    """Per-trajectory payoff of ``rule`` in path order.

    Rules with ``intervals`` run compiled and, with ``bridge_fix``, also stop
    on excursions into the stop set between grid points (exact Brownian-bridge
    touch probability against a linearised barrier). Predicate-only rules are
    monitored on the grid alone.
    """
    _check(start)
    grid = time_grid(start.t, mc.n_steps, mc.time_grid)
    if rule.intervals is not None:
        low, high = (np.ascontiguousarray(np.reshape(v, (grid.size, -1)), dtype=float)
                     for v in rule.intervals(grid))
        pi0 = float(posterior_value(start.t, start.x, p))

        def run_fast(lo, hi):
            out = np.empty(hi - lo)
            _interval_kernel(np.uint64(mc.seed), lo, mc.antithetic, pi0, p.a, start.x,
                             grid, low, high, bridge_fix, out)
            return out

        return np.concatenate(_run_batches(run_fast, mc.total_paths, BATCH))
    return _stopped_values_generic(rule, p, start, mc, grid)


def _stopped_values_generic(rule, p, start, mc, grid):
    def run(lo, hi):
        streams, signs = _stream_ids(lo, hi, mc.antithetic)
        theta = _draw_theta(p, start, mc, streams, signs)
        st = _Stepper(p, mc, grid, streams, signs, theta, start.x)
        where = np.arange(hi - lo)
        out = np.empty(hi - lo)
        for k in range(mc.n_steps + 1):
            if k == mc.n_steps:
                out[where] = st.x
                break
            fire = np.asarray(rule.stop(grid[k], st.x), dtype=bool)
            if fire.any():
                out[where[fire]] = st.x[fire]
                live = ~fire
                where = where[live]
                st.keep(live)
                if where.size == 0:
                    break
            st.step(k)
        return out

    return np.concatenate(_run_batches(run, mc.total_paths, BATCH))


def summarize(values: np.ndarray, antithetic: bool) -> EvalResult:
    if antithetic:
        values = 0.5 * (values[0::2] + values[1::2])
    n = values.size
    mean = math.fsum(values) / n
    if n > 1:
        var = math.fsum((values - mean) ** 2) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = math.nan
    return EvalResult(mean, se, n)


def evaluate_policy(rule: PolicyRule, p: ModelParams, start: TimeState, mc: MCConfig,
                    bridge_fix: bool = True) -> EvalResult:
    """Mean and standard error of the payoff from stopping by ``rule`` (forced stop at t = 1)."""
    return summarize(stopped_values(rule, p, start, mc, bridge_fix), mc.antithetic)


@dataclass(frozen=True)
class FilterGapReport:
    """Per-path max |Pi_euler - Pi(t, X_euler)| for a coarse and a refined Euler run on common noise."""

    n_steps: int
    refine: int
    coarse_gaps: np.ndarray
    fine_gaps: np.ndarray

    @property
    def max_gap(self) -> float:
        return float(self.coarse_gaps.max())

    @property
    def median_ratio(self) -> float:
        """Median over paths of coarse gap / fine gap."""
        ok = self.fine_gaps > 0
        if not ok.any():
            return math.nan
        return float(np.median(self.coarse_gaps[ok] / self.fine_gaps[ok]))


def _euler_gap(p: ModelParams, times: np.ndarray, dB: np.ndarray) -> np.ndarray:
    n = dB.shape[0]
    x = np.zeros(n)
    pi = np.full(n, p.pi)
    gap = np.zeros(n)
    for k in range(times.size - 1):
        t, h = times[k], times[k + 1] - times[k]
        rho = (p.a - x) / (1.0 - t) - p.a
        dx = (p.a + pi * rho) * h + dB[:, k]
        pi = np.clip(pi + rho * pi * (1.0 - pi) * dB[:, k], 0.0, 1.0)
        x = x + dx
        gap = np.maximum(gap, np.abs(pi - posterior_value(times[k + 1], x, p)))
    return gap


def euler_filter_check(p: ModelParams, mc: MCConfig, refine: int = 4,
                       t_end: float = 0.9) -> FilterGapReport:
    """Euler-integrate the innovation-driven (X, Pi) pair and compare Pi with the closed-form mapping.

    The innovation Brownian path is shared: the coarse run (mc.n_steps on
    [0, t_end]) uses sums of ``refine`` consecutive fine increments. The
    horizon stops short of 1, where the signal-to-noise ratio blows up.
    """
    check_time(t_end)
    n = mc.n_paths
    nf = mc.n_steps * refine
    fine_t = np.linspace(0.0, t_end, nf + 1)
    streams = np.arange(n, dtype=np.int64)
    z = np.empty((n, nf))
    for blk in range((nf + 3) // 4):
        vals = rng.normal_block(mc.seed, streams, TAG_FILTER, blk)
        j = blk * 4
        w = min(4, nf - j)
        z[:, j:j + w] = vals[:, :w]
    dB_fine = z * math.sqrt(t_end / nf)
    dB_coarse = dB_fine.reshape(n, mc.n_steps, refine).sum(axis=2)
    coarse_t = fine_t[::refine]
    return FilterGapReport(mc.n_steps, refine,
                           _euler_gap(p, coarse_t, dB_coarse),
                           _euler_gap(p, fine_t, dB_fine))
