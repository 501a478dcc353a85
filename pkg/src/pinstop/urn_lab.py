"""Discrete urn games: Shepp's classical urn and the uncertain-replacement variant.

The uncertain urn starts with m balls worth -1 and p worth +1. With
probability ``prior`` draws are without replacement (the discrete bridge),
otherwise with replacement (a discrete random walk with drift). The player
may stop after any draw and collects (#plus - #minus). Sequence order
cancels in both likelihoods, so the state is the count pair (j, k) of minus
and plus draws.

Conventions: the horizon is N = m + p draws under either law, and on exact
ties between stopping and drawing the table records "stop".
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import expit, gammaln

from .closed_form_a0 import value_a0
from .errors import ConfigError

EXACT_MAX_N = 50      # uncertain urn: rational arithmetic up to this horizon
SHEPP_EXACT_MAX = 200  # classical urn: rational arithmetic up to this m + p


def _shepp_table(m: int, p: int, exact: bool):
    one = Fraction(1) if exact else 1.0
    zero = one * 0
    # V[i][j]: value with i minus and j plus balls left
    V = [[zero] * (p + 1) for _ in range(m + 1)]
    for j in range(p + 1):
        V[0][j] = one * j
    for i in range(1, m + 1):
        for j in range(1, p + 1):
            n = i + j
            cont = (one * i / n) * (V[i - 1][j] - 1) + (one * j / n) * (V[i][j - 1] + 1)
            V[i][j] = cont if cont > 0 else zero
    return V


def shepp_value(m: int, p: int, exact: bool | None = None):
    """Optimal expected gain of the classical urn (draws without replacement).

    Rational arithmetic by default when m + p <= 200; the return type is then
    ``Fraction``.
    """
    m, p = int(m), int(p)
    if m < 0 or p < 0 or m + p == 0:
        raise ConfigError("need m, p >= 0, not both zero")
    if exact is None:
        exact = m + p <= SHEPP_EXACT_MAX
    return _shepp_table(m, p, exact)[m][p]


def shepp_threshold(p: int, m_max: int | None = None) -> int:
    """beta(p): the largest m for which the classical urn has positive value."""
    p = int(p)
    if p < 1:
        raise ConfigError("p must be >= 1")
    m_max = m_max or 4 * p + 10
    V = _shepp_table(m_max, p, m_max + p <= SHEPP_EXACT_MAX)
    pos = [m for m in range(m_max + 1) if V[m][p] > 0]
    beta = max(pos)
    if beta == m_max:
        raise ConfigError(f"m_max = {m_max} too small for p = {p}")
    return beta


@dataclass(frozen=True)
class UrnSpec:
    m: int
    p: int
    prior: float

    def __post_init__(self):
        if int(self.m) != self.m or int(self.p) != self.p or self.m < 1 or self.p < 1:
            raise ConfigError("m and p must be integers >= 1")
        if not 0.0 <= float(self.prior) <= 1.0:
            raise ConfigError("prior must lie in [0, 1]")

    @property
    def n(self) -> int:
        return int(self.m + self.p)


@dataclass(frozen=True)
class UrnValueTable:
    """Arrays indexed [j, k] (minus draws, plus draws); entries with j + k > N are NaN.

    ``exact`` holds the Fraction values when the table was solved in rational mode.
    """

    spec: UrnSpec
    value: np.ndarray
    stop: np.ndarray
    posterior: np.ndarray
    exact: dict | None = None

    @property
    def value00(self):
        if self.exact is not None:
            return self.exact[0, 0]
        return float(self.value[0, 0])

    def rows(self):
        """(n, j, k, posterior, value, decision) over all states, by draw count."""
        N = self.spec.n
        for n in range(N + 1):
            for j in range(n + 1):
                k = n - j
                yield (n, j, k, float(self.posterior[j, k]), float(self.value[j, k]),
                       "stop" if self.stop[j, k] else "draw")


def _falling(x: int, r: int):
    out = 1
    for i in range(r):
        out *= x - i
    return out


def _solve_exact(u: UrnSpec) -> UrnValueTable:
    m, p, N = u.m, u.p, u.n
    prior = Fraction(u.prior)
    post = {}
    for j in range(N + 1):
        for k in range(N + 1 - j):
            n = j + k
            l1 = Fraction(_falling(m, j) * _falling(p, k), _falling(N, n))
            l0 = Fraction(m**j * p**k, N**n)
            den = prior * l1 + (1 - prior) * l0
            # den = 0 only for prior = 1 at counts impossible without replacement
            post[j, k] = prior * l1 / den if den else Fraction(0)
    val = {}
    stop = {}
    for n in range(N, -1, -1):
        for j in range(n + 1):
            k = n - j
            pay = Fraction(k - j)
            if n == N:
                val[j, k], stop[j, k] = pay, True
                continue
            q = post[j, k]
            up = q * Fraction(max(p - k, 0), N - n) + (1 - q) * Fraction(p, N)
            cont = up * val[j, k + 1] + (1 - up) * val[j + 1, k]
            if pay >= cont:
                val[j, k], stop[j, k] = pay, True
            else:
                val[j, k], stop[j, k] = cont, False
    V = np.full((N + 1, N + 1), np.nan)
    P = np.full((N + 1, N + 1), np.nan)
    S = np.zeros((N + 1, N + 1), dtype=bool)
    for (j, k), v in val.items():
        V[j, k] = float(v)
        P[j, k] = float(post[j, k])
        S[j, k] = stop[j, k]
    return UrnValueTable(u, V, S, P, exact=val)


def _log_falling(x: int, r: np.ndarray) -> np.ndarray:
    out = np.full(r.shape, -np.inf)
    ok = r <= x
    out[ok] = gammaln(x + 1.0) - gammaln(x - r[ok] + 1.0)
    return out


def _solve_float(u: UrnSpec) -> UrnValueTable:
    m, p, N = u.m, u.p, u.n
    j = np.arange(N + 1)[:, None]
    k = np.arange(N + 1)[None, :]
    n = j + k
    valid = n <= N
    jj, kk, nn = np.broadcast_arrays(j, k, n)
    with np.errstate(invalid="ignore"):
        log_l1 = (_log_falling(m, jj) + _log_falling(p, kk)
                  - np.where(valid, _log_falling(N, np.minimum(nn, N)), 0.0))
        log_l0 = jj * math.log(m / N) + kk * math.log(p / N)
    if u.prior in (0.0, 1.0):
        post = np.where(np.isfinite(log_l1), u.prior, 0.0)
    else:
        logit = math.log(u.prior) - math.log1p(-u.prior)
        post = expit(logit + log_l1 - log_l0)
    post = np.where(valid, post, np.nan)

    V = np.full((N + 1, N + 1), np.nan)
    S = np.zeros((N + 1, N + 1), dtype=bool)
    d = np.arange(N + 1)
    V[d, N - d] = (N - d) - d
    S[d, N - d] = True
    for s in range(N - 1, -1, -1):
        jd = np.arange(s + 1)
        kd = s - jd
        q = post[jd, kd]
        up = q * np.maximum(p - kd, 0) / (N - s) + (1.0 - q) * p / N
        cont = up * V[jd, kd + 1] + (1.0 - up) * V[jd + 1, kd]
        pay = (kd - jd).astype(float)
        st = pay >= cont
        V[jd, kd] = np.where(st, pay, cont)
        S[jd, kd] = st
    return UrnValueTable(u, V, S, post)


def uncertain_urn_solve(u: UrnSpec, exact: bool | None = None) -> UrnValueTable:
    """Backward induction on the (j, k) lattice. Rational when N <= 50 unless told otherwise."""
    if exact is None:
        exact = u.n <= EXACT_MAX_N
    return _solve_exact(u) if exact else _solve_float(u)


@dataclass(frozen=True)
class ScalingRow:
    p: int
    scaled_value: float
    limit: float

    @property
    def gap(self) -> float:
        return abs(self.scaled_value - self.limit)


def scaling_check(p_list, prior: float) -> list[ScalingRow]:
    """Balanced urns m = p: value(0, 0) / sqrt(2p) against the continuous value at (0, 0)."""
    limit = float(value_a0(0.0, 0.0, prior))
    rows = []
    for p in p_list:
        tab = uncertain_urn_solve(UrnSpec(p, p, prior), exact=False)
        rows.append(ScalingRow(int(p), float(tab.value[0, 0]) / math.sqrt(2 * p), limit))
    return rows


def gaps_decreasing(rows: list[ScalingRow]) -> bool:
    g = [r.gap for r in rows]
    return all(b < a for a, b in zip(g, g[1:]))
