"""Explicit solution for a balanced urn (a = 0) and its comparative statics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .belief import posterior_value
from .classical_bridge import _as_out, policy_tau_b, value_known_pinning
from .core_math import Bracket, find_root
from .errors import DomainError, NoSignChange, NotFound
from .params import ModelParams

ZERO_CROSSING_BRACKET = Bracket(-5.0, -1e-9)


def value_a0(t, x, pi: float):
    """V(t, x, pi) = (1 - Pi) x + Pi V_1^0(t, x). Vectorised over (t, x)."""
    post = np.asarray(posterior_value(t, x, ModelParams(0.0, pi)))
    x = np.asarray(x, dtype=float)
    return _as_out((1.0 - post) * x + post * value_known_pinning(t, x, 0.0))


@dataclass(frozen=True)
class UncertainValue:
    t: float
    x: float
    pi: float
    value: float

    @classmethod
    def at(cls, t: float, x: float, pi: float) -> "UncertainValue":
        return cls(float(t), float(x), float(pi), float(value_a0(t, x, pi)))


def policy_a0(t, x):
    """Optimal rule for a = 0: the known-pinning boundary, capped at the horizon.

    It does not take the prior as an argument because it does not depend on it.
    """
    return policy_tau_b(t, x, 0.0)


def zero_crossing_a0(pi: float) -> float:
    """The x* < 0 where V(0, x*, pi) = 0."""
    if not 0.0 < pi <= 1.0:
        raise DomainError("zero crossing needs 0 < pi <= 1")
    f = lambda x: value_a0(0.0, x, pi)
    try:
        return find_root(f, ZERO_CROSSING_BRACKET)
    except NoSignChange as exc:
        b = ZERO_CROSSING_BRACKET
        raise NotFound(f"no zero crossing on [{b.lo}, {b.hi}] for pi={pi}: "
                       f"V={f(b.lo):.3g}, {f(b.hi):.3g}") from exc
