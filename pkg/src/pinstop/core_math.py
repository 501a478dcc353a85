"""Scalar special functions and the bracketing root finder."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special

from .errors import MaxIterations, NoSignChange

SQRT_2PI = math.sqrt(2.0 * math.pi)
MAX_ITER = 200
DEFAULT_TOL = 1e-12


def norm_pdf(y):
    """Standard normal density; accepts scalars or arrays."""
    y = np.asarray(y, dtype=float)
    out = np.exp(-0.5 * y * y) / SQRT_2PI
    return float(out) if out.ndim == 0 else out


def norm_cdf(y):
    """Standard normal CDF, accurate to ~1e-16 absolute (erfc-based)."""
    out = special.ndtr(np.asarray(y, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def scaled_cdf(y):
    """exp(y^2 / 2) * Phi(y), evaluated without overflow.

    Uses Phi(y) = erfc(-y / sqrt 2) / 2 and the scaled erfc, so the product
    stays finite for large |y| on the negative side and moderate positive y.
    """
    out = 0.5 * special.erfcx(-np.asarray(y, dtype=float) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")


def find_root(f: Callable[[float], float], b: Bracket, tol: float = DEFAULT_TOL) -> float:
    """Root of ``f`` inside ``b`` by Brent's method (bisection + inverse quadratic steps).

    Returns r with |f(r)| <= tol or with the final bracket narrower than tol.
    """
    flo, fhi = f(b.lo), f(b.hi)
    if flo == 0.0:
        return b.lo
    if fhi == 0.0:
        return b.hi
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(f"f({b.lo})={flo:.3g} and f({b.hi})={fhi:.3g} share a sign")
    try:
        r, info = optimize.brentq(f, b.lo, b.hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                                  maxiter=MAX_ITER, full_output=True, disp=False)
    except RuntimeError as exc:
        raise MaxIterations(str(exc)) from exc
    if not info.converged:
        raise MaxIterations(f"root finder stopped after {info.iterations} iterations")
    return float(r)


def alpha_equation(x: float) -> float:
    """sqrt(2 pi)(1 - x^2) exp(x^2/2) Phi(x) - x; vanishes at the boundary constant."""
    return SQRT_2PI * (1.0 - x * x) * scaled_cdf(x) - x


@dataclass(frozen=True)
class AlphaConstant:
    value: float
    residual: float

    def __float__(self):
        return self.value


_alpha_lock = threading.Lock()
_alpha_cache: AlphaConstant | None = None


def solve_alpha() -> AlphaConstant:
    """Unique positive root of the boundary-constant equation, computed once per process."""
    global _alpha_cache
    if _alpha_cache is None:
        with _alpha_lock:
            if _alpha_cache is None:
                r = find_root(alpha_equation, Bracket(0.0, 1.0), tol=1e-15)
                _alpha_cache = AlphaConstant(r, alpha_equation(r))
    return _alpha_cache


def alpha() -> float:
    return solve_alpha().value
