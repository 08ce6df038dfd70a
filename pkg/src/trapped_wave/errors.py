"""Exception types shared across the package."""


class SingularityError(ZeroDivisionError):
    """A special function or operator was evaluated at one of its poles."""


class NotApplicableError(ValueError):
    """The requested quantity does not exist for this scatterer kind."""


class TruncationError(RuntimeError):
    """A truncated series (modes, windows, catalog) has not converged."""


class ContourError(RuntimeError):
    """The argument-principle count could not be resolved to an integer."""


class ConfigError(ValueError):
    """Invalid run configuration or serialized object."""


class NumericalFailure(RuntimeError):
    """A numerical kernel failed (singular system, divergent iteration)."""
