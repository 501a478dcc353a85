"""Optimal stopping of a Brownian path that may or may not be pinned."""
from .errors import (ConfigError, DomainError, MaxIterations, NoSignChange, NonConvergence,
                     NotFound, PinstopError)
from .params import GridSpec, MCConfig, ModelParams, TimeState

__all__ = [
    "ConfigError", "DomainError", "MaxIterations", "NoSignChange", "NonConvergence", "NotFound",
    "PinstopError", "GridSpec", "MCConfig", "ModelParams", "TimeState",
]
__version__ = "0.1.0"
