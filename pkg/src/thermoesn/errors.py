"""Exception hierarchy shared across the package.

Every error raised on purpose derives from ThermoesnError so the CLI can map
failures to documented exit codes; `exit_code` is that mapping.
"""

from __future__ import annotations


class ThermoesnError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(ThermoesnError):
    """Bad configuration: unknown key, type mismatch, out-of-range value."""

    exit_code = 2


class MissingFileError(ThermoesnError):
    """A required input file does not exist or cannot be read."""

    exit_code = 3


class InvalidArgumentError(ThermoesnError, ValueError):
    """A precondition on an argument was violated."""


class DimensionMismatchError(InvalidArgumentError):
    """Array shapes do not line up (also: missing CSV column, bad partition)."""

    exit_code = 4


class NumericalBlowupError(ThermoesnError):
    """A state component exceeded the configured magnitude bound."""

    exit_code = 5


class InsufficientDataError(ThermoesnError):
    """A time series is too short for the requested operation."""


class SingularSystemError(ThermoesnError):
    """The ridge system is rank-deficient and unregularized."""


class UntrainedReadoutError(ThermoesnError):
    """Prediction was requested before the readout was trained."""


class SpectralRadiusError(ThermoesnError):
    """Spectral-radius estimation failed (zero or non-convergent spectrum)."""


class ValidationFailedError(ThermoesnError):
    """No training candidate passed the closed-loop statistical validation."""


class EmptyWindowError(ThermoesnError):
    """A time average was requested over a window with no samples."""


class ZeroReferenceError(ThermoesnError):
    """Relative error against a zero reference value is undefined."""


class LyapunovConvergenceWarning(UserWarning):
    """The running Lyapunov estimate did not settle over the last half run."""
