"""Exception hierarchy shared by all pinstop modules."""


class PinstopError(Exception):
    """Base class for every error raised by the library."""


class DomainError(PinstopError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class ConfigError(PinstopError, ValueError):
    """A configuration object violates its invariants."""


class NoSignChange(PinstopError):
    """Bracket endpoints give function values of the same sign."""


class MaxIterations(PinstopError):
    """An iterative method hit its iteration cap before converging."""


class NotFound(PinstopError):
    """A searched-for root or crossing does not exist on the search range."""


class NonConvergence(PinstopError):
    """The PSOR inner iteration failed to reach tolerance on some time slice."""
