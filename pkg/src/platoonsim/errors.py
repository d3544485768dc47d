"""Exception types shared across the package."""


class PlatoonSimError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(PlatoonSimError):
    """An array argument has the wrong shape or size."""


class DomainError(PlatoonSimError):
    """A scalar argument lies outside the mathematical domain of an operation."""


class ConvergenceError(PlatoonSimError):
    """An iterative routine failed to reach its tolerance within the iteration cap."""


class ConfigurationError(PlatoonSimError):
    """A parameter set is inconsistent or outside the supported regime."""


class StepResolutionError(PlatoonSimError):
    """The certified step fell below one grid tick, so the bound cannot be kept."""


class ValidationError(PlatoonSimError):
    """An independent cross-check contradicted a certified result."""
