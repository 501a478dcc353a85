"""Finite-difference solver for the reweighted stopping problem under P_0.

Under the drifted-Brownian measure the value is W = sup E_0[G(t + tau, X)],
with obstacle G = x (1 + k L). We solve for the premium D = W - G >= 0,
which satisfies the linear complementarity problem

    -(d_t + 1/2 d_xx + a d_x) D >= H,   D >= 0,   complementarity,

where H = (d_t + 1/2 d_xx + a d_x) G is available in closed form. Working with D
keeps the stiff spike of G near the pin out of the discretisation.
Time stepping is Crank-Nicolson with implicit start-up steps at the cutoff,
on nodes uniform in sqrt(1 - t) so steps shrink towards the horizon. Each
slice is solved by projected SOR.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .belief import h_positive, indicator_H, likelihood_ratio, payoff_G, posterior_value
from .classical_bridge import value_known_pinning
from .errors import ConfigError, NonConvergence
from .params import GridSpec, ModelParams

MAX_SWEEPS = 10_000


@njit(cache=True, nogil=True)
def _psor(lo, di, up, r, D, omega, tol, maxit):
    """Projected SOR on the tridiagonal LCP; the end nodes are held fixed. Returns sweeps or -1."""
    n = D.size
    for it in range(maxit):
        err = 0.0
        for i in range(1, n - 1):
            y = (r[i] - lo * D[i - 1] - up * D[i + 1]) / di
            new = D[i] + omega * (y - D[i])
            if new < 0.0:
                new = 0.0
            e = abs(new - D[i])
            if e > err:
                err = e
            D[i] = new
        if err < tol:
            return it + 1
    return -1


def time_nodes(g: GridSpec) -> np.ndarray:
    """nt + 1 times from 0 to t_cutoff, uniform in sqrt(1 - t)."""
    s = np.linspace(1.0, math.sqrt(1.0 - g.t_cutoff), g.nt + 1)
    t = 1.0 - s * s
    t[0], t[-1] = 0.0, g.t_cutoff
    return t


def space_nodes(g: GridSpec) -> np.ndarray:
    return np.linspace(g.x_min, g.x_max, g.nx)


@dataclass(frozen=True)
class ValueSurface:
    """Solution on the (t, x) grid; row n is time t[n]."""

    grid: GridSpec
    params: ModelParams
    t: np.ndarray
    x: np.ndarray
    w: np.ndarray          # P_0-weighted value W = G + D
    v: np.ndarray          # V = (1 - Pi) W
    obstacle: np.ndarray   # G
    premium: np.ndarray    # D = W - G
    signed: np.ndarray     # unprojected Gauss-Seidel value; < 0 inside the contact set
    contact: np.ndarray    # empty on the terminal slice
    residual: np.ndarray   # per slice max |min(D, A D - r)|
    sweeps: int
    psor_tol: float

    def value_at(self, t: float, x: float) -> float:
        """Bilinear interpolation of V."""
        n = int(np.clip(np.searchsorted(self.t, t, side="right") - 1, 0, self.t.size - 2))
        f = (t - self.t[n]) / (self.t[n + 1] - self.t[n])
        v0 = np.interp(x, self.x, self.v[n])
        v1 = np.interp(x, self.x, self.v[n + 1])
        return float((1.0 - f) * v0 + f * v1)


def _operator_coeffs(a, dx):
    cl = 0.5 / dx**2 - a / (2.0 * dx)
    cu = 0.5 / dx**2 + a / (2.0 * dx)
    cd = -1.0 / dx**2
    return cl, cd, cu


def terminal_premium(t: float, x: np.ndarray, p: ModelParams, kind: str) -> np.ndarray:
    """D at the cutoff: 0 ("payoff", W = G) or k L (V_1^a - x) ("bridge", the known-pinning continuation)."""
    if kind == "payoff":
        return np.zeros_like(x)
    if kind == "bridge":
        d = p.odds * likelihood_ratio(t, x, p.a) * (value_known_pinning(t, x, p.a) - x)
        d = np.maximum(d, 0.0)
        d[0] = d[-1] = 0.0
        return d
    raise ConfigError(f"unknown terminal condition {kind!r}")


def solve(p: ModelParams, g: GridSpec | None = None, psor_tol: float = 1e-9, omega: float = 1.5,
          terminal: str = "payoff", rannacher: int = 2) -> ValueSurface:
    if not 0.0 < p.pi < 1.0:
        raise ConfigError("solver needs 0 < pi < 1; pi in {0, 1} has closed forms")
    if not 0.0 < omega < 2.0:
        raise ConfigError("omega must lie in (0, 2)")
    if not psor_tol > 0.0:
        raise ConfigError("psor_tol must be positive")
    g = g or GridSpec.around(p.a)
    t = time_nodes(g)
    x = space_nodes(g)
    nt, nx = g.nt, g.nx
    cl, cd, cu = _operator_coeffs(p.a, g.dx)

    D = np.empty((nt + 1, nx))
    Y = np.empty((nt + 1, nx))
    res = np.zeros(nt + 1)
    D[nt] = terminal_premium(t[nt], x, p, terminal)
    Y[nt] = D[nt]
    H_next = indicator_H(t[nt], x, p)
    total = 0
    for n in range(nt - 1, -1, -1):
        dt = t[n + 1] - t[n]
        th = 1.0 if n >= nt - rannacher else 0.5
        H_now = indicator_H(t[n], x, p)
        prev = D[n + 1]
        LD = np.zeros(nx)
        LD[1:-1] = cl * prev[:-2] + cd * prev[1:-1] + cu * prev[2:]
        r = prev + (1.0 - th) * dt * LD + dt * (th * H_now + (1.0 - th) * H_next)
        lo, di, up = -th * dt * cl, 1.0 - th * dt * cd, -th * dt * cu
        cur = prev.copy()
        cur[0] = cur[-1] = 0.0
        sweeps = _psor(lo, di, up, r, cur, omega, psor_tol, MAX_SWEEPS)
        if sweeps < 0:
            raise NonConvergence(f"PSOR hit {MAX_SWEEPS} sweeps at t = {t[n]:.6g}")
        total += sweeps
        D[n] = cur
        y = np.zeros(nx)
        y[1:-1] = (r[1:-1] - lo * cur[:-2] - up * cur[2:]) / di
        Y[n] = y
        lam = di * (cur[1:-1] - y[1:-1])
        res[n] = float(np.max(np.abs(np.minimum(cur[1:-1], lam))))
        H_next = H_now

    T = t[:, None]
    G = payoff_G(T, x[None, :], p)
    W = G + D
    post = posterior_value(T, x[None, :], p)
    V = (1.0 - post) * W
    # a node is in the contact set when the constraint is active (the unprojected
    # value is negative); exact ties, e.g. where L underflows, go by the sign of H
    stop_tie = (Y == 0.0) & ~h_positive(T, x[None, :], p)
    contact = (D == 0.0) & ((Y < 0.0) | stop_tie)
    contact[:, 0] = contact[:, -1] = False
    contact[nt] = False  # forced stop at the cutoff, not part of the free boundary
    return ValueSurface(g, p, t, x, W, V, G, D, Y, contact, res, total, psor_tol)


def complementarity_residual(s: ValueSurface) -> float:
    return float(s.residual.max())


def never_stop_mask(p: ModelParams, g: GridSpec) -> np.ndarray:
    """True where H > 0 on the solver grid: stopping there is never optimal."""
    if not 0.0 < p.pi < 1.0:
        raise ConfigError("need 0 < pi < 1")
    t = time_nodes(g)
    return h_positive(t[:, None], space_nodes(g)[None, :], p)


TOO_GOOD = "too-good-to-persist"
STOP_LOSS = "stop-loss"


@dataclass(frozen=True)
class StoppingRegion:
    """Contact set as sorted disjoint x-intervals per time slice, with edges refined between nodes.

    The curves follow the topmost interval: its lower edge is the
    too-good-to-persist boundary and, when the interval ends below the grid
    top, its upper edge is the stop-loss boundary.
    """

    t: np.ndarray
    intervals: list = field(repr=False)
    lower: np.ndarray
    upper: np.ndarray
    x_edges: tuple = (-np.inf, np.inf)  # outermost interior nodes of the solver grid

    def as_rule(self, name: str = "pde-region"):
        """Stopping rule "stop inside any contact interval", for Monte Carlo evaluation.

        Intervals that reach the edge of the grid are taken as unbounded.
        """
        from .mc_engine import interval_rule

        K = max(1, max(len(iv) for iv in self.intervals))
        lo = np.full((self.t.size, K), np.nan)
        hi = np.full((self.t.size, K), np.nan)
        for n, row in enumerate(self.intervals):
            for m, (l, h) in enumerate(row):
                lo[n, m] = -np.inf if l <= self.x_edges[0] else l
                hi[n, m] = np.nan if h >= self.x_edges[1] else h
        return interval_rule(self.t, lo, hi, name)

    def labels(self) -> list[str]:
        out = []
        for lo, hi in zip(self.lower, self.upper):
            if np.isnan(lo):
                out.append("none")
            elif np.isnan(hi):
                out.append(TOO_GOOD)
            else:
                out.append(f"{TOO_GOOD}+{STOP_LOSS}")
        return out

    def first_contact_time(self) -> float:
        hit = [n for n, iv in enumerate(self.intervals) if iv]
        return float(self.t[hit[0]]) if hit else math.nan

    def n_intervals(self) -> np.ndarray:
        return np.array([len(iv) for iv in self.intervals])

    def to_csv(self, target) -> None:
        """Write (t, lower_x, upper_x, label) rows to a path or an open text file."""
        if hasattr(target, "write"):
            self._write(target)
        else:
            with open(target, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh) -> None:
        w = csv.writer(fh)
        w.writerow(["t", "lower_x", "upper_x", "label"])
        for t, lo, hi, lab in zip(self.t, self.lower, self.upper, self.labels()):
            w.writerow([_fmt(t), _fmt(lo), _fmt(hi), lab])


def _fmt(v: float) -> str:
    return "" if np.isnan(v) else f"{v:.17g}"


def _edge(x, y, inside, outside):
    # zero of the linear interpolant of y between a continuation and a contact node
    yo, yi = y[outside], y[inside]
    if yo <= 0.0 or yi > 0.0:
        return x[inside]
    return x[outside] + (x[inside] - x[outside]) * yo / (yo - yi)


def _runs(mask):
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    br = np.flatnonzero(np.diff(idx) > 1)
    return list(zip(np.r_[idx[0], idx[br + 1]], np.r_[idx[br], idx[-1]]))


def extract_region(s: ValueSurface) -> StoppingRegion:
    """Scan each slice before the cutoff into maximal contact runs."""
    nx = s.x.size
    m = s.t.size - 1
    intervals, lower, upper = [], np.full(m, np.nan), np.full(m, np.nan)
    for n in range(m):
        y = s.signed[n]
        row = []
        for i0, i1 in _runs(s.contact[n]):
            left = _edge(s.x, y, i0, i0 - 1) if i0 > 1 else s.x[i0]
            right = _edge(s.x, y, i1, i1 + 1) if i1 < nx - 2 else s.x[i1]
            row.append((float(left), float(right)))
        intervals.append(row)
        if row:
            i0, i1 = _runs(s.contact[n])[-1]
            lower[n] = row[-1][0]
            if i1 < nx - 2:
                upper[n] = row[-1][1]
    return StoppingRegion(s.t[:m].copy(), intervals, lower, upper, (s.x[1], s.x[-2]))
