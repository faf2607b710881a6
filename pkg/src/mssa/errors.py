"""Exception types shared across the package.

The CLI maps these onto process exit codes: validation problems exit
with 2, solver infeasibility with 3 and data problems with 4.
"""


class MssaError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(MssaError, ValueError):
    """Invalid dimensions, parameter values or configuration input."""


class NonStationaryError(ValidationError):
    """Autoregressive part has a root on or inside the unit circle."""


class NoSolutionError(MssaError, RuntimeError):
    """The constrained filter problem has no admissible solution.

    Raised for holding-time constraints outside the attainable range,
    for degenerate spectral support, and for root-finding failures.
    """


class DataError(MssaError, RuntimeError):
    """Malformed or unusable input data (CSV parsing, alignment, ...)."""
