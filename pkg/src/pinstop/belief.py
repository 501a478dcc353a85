"""Bayesian layer: likelihood ratio, posterior mapping, reweighted payoff and its drift."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .classical_bridge import _as_out, check_time
from .core_math import Bracket, find_root
from .errors import DomainError, NotFound
from .params import ModelParams


def log_likelihood_ratio(t, x, a: float):
    t = check_time(t)
    x = np.asarray(x, dtype=float)
    s = 1.0 - t
    return _as_out(-(x - a * t) ** 2 / (2.0 * s) - 0.5 * np.log(s))


def likelihood_ratio(t, x, a: float):
    """Density of the bridge law relative to drifted Brownian motion on F_t.

    L(t, x) = (1 - t)^(-1/2) exp(-(x - a t)^2 / (2 (1 - t))), the ratio of the
    N(a t, t (1 - t)) and N(a t, t) marginals. L(0, 0) = 1, so the posterior
    starts at the prior for every a.
    """
    return _as_out(np.exp(log_likelihood_ratio(t, x, a)))


@dataclass(frozen=True)
class PosteriorPoint:
    t: float
    x: float
    pi0: float
    value: float


def posterior_value(t, x, p: ModelParams):
    """Pi(t, x, pi): belief in pinning after reaching x at time t. Vectorised."""
    logl = np.asarray(log_likelihood_ratio(t, x, p.a))
    if p.pi == 0.0:
        return _as_out(np.zeros_like(logl))
    if p.pi == 1.0:
        return _as_out(np.ones_like(logl))
    logit = math.log(p.pi) - math.log1p(-p.pi) + logl
    return _as_out(special.expit(logit))


def posterior(t: float, x: float, p: ModelParams) -> PosteriorPoint:
    return PosteriorPoint(float(t), float(x), p.pi, float(posterior_value(t, x, p)))


def signal_to_noise(t, x, a: float):
    t = check_time(t)
    return _as_out((a - np.asarray(x, dtype=float)) / (1.0 - t) - a)


def _require_p0(p: ModelParams):
    if p.pi >= 1.0:
        raise DomainError("the reformulation under P0 needs pi < 1")


def payoff_G(t, x, p: ModelParams):
    """Reweighted payoff x * (1 + odds * L) whose P0-supremum reproduces the value."""
    _require_p0(p)
    x = np.asarray(x, dtype=float)
    return _as_out(x * (1.0 + p.odds * likelihood_ratio(t, x, p.a)))


def indicator_H(t, x, p: ModelParams):
    """Drift of the reweighted payoff under P0; stopping never pays where it is positive."""
    _require_p0(p)
    t = check_time(t)
    x = np.asarray(x, dtype=float)
    L = likelihood_ratio(t, x, p.a)
    return _as_out(p.a - p.odds * (x - p.a) * L / (1.0 - t))


def h_positive(t, x, p: ModelParams):
    """Sign test H > 0 done in log space, so it stays exact where L underflows."""
    _require_p0(p)
    t, x = np.broadcast_arrays(check_time(t), np.asarray(x, dtype=float))
    a = p.a
    d = x - a
    if p.pi == 0.0:
        return _as_out(np.full(x.shape, a > 0.0))
    with np.errstate(divide="ignore"):
        # log of |odds * (x - a) * L / (1 - t)|
        log_term = (math.log(p.odds) + np.log(np.abs(d))
                    + log_likelihood_ratio(t, x, a) - np.log1p(-t))
        log_a = math.log(abs(a)) if a != 0.0 else -np.inf
    # H = a - sign(d) * exp(log_term)
    out = np.where(
        d < 0.0,
        (a >= 0.0) | (log_term > log_a),
        np.where(d > 0.0, (a > 0.0) & (log_term < log_a), a > 0.0),
    )
    return _as_out(out)


def _h_extremum(t: float, p: ModelParams, xatol: float) -> float:
    # a > 0: inf_x H, attained above the pin; a < 0: sup_x H, attained below it.
    half = 6.0 * math.sqrt(1.0 - t)
    if p.a > 0:
        lo, hi, sign = p.a, p.a + half, 1.0
    else:
        lo, hi, sign = p.a - half, p.a, -1.0
    res = optimize.minimize_scalar(lambda x: sign * indicator_H(t, x, p), bounds=(lo, hi),
                                   method="bounded", options={"xatol": xatol})
    return sign * float(res.fun)


def critical_time(p: ModelParams, tol: float = 1e-12) -> float:
    """First time at which H stops being one-signed in x.

    For a > 0 this is the smallest t with inf_x H(t, x) = 0 (before it, H > 0
    everywhere and stopping is never optimal); for a < 0 the mirror statement
    with sup_x H.
    """
    if p.a == 0.0:
        raise DomainError("critical time is defined for a != 0")
    if not 0.0 < p.pi < 1.0:
        raise DomainError("critical time needs 0 < pi < 1")
    f = lambda t: _h_extremum(t, p, xatol=1e-11)
    lo, hi = 1e-12, 1.0 - 1e-9
    flo, fhi = f(lo), f(hi)
    if np.sign(flo) == np.sign(fhi) or np.sign(flo) != np.sign(p.a):
        raise NotFound(f"extremum of H does not change sign on (0, 1): {flo:.3g}, {fhi:.3g}")
    return find_root(f, Bracket(lo, hi), tol=tol)

