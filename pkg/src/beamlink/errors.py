"""
Exception hierarchy. Every error carries the exit code the command line
returns when it escapes a command.
"""


class BeamlinkError(Exception):
    """Base class, mirrors an HTTP error: an exit code plus a detail string."""

    exit_code = 4

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class ConfigError(BeamlinkError):
    """Invalid configuration or malformed input file."""

    exit_code = 2


class OutputError(BeamlinkError):
    """Reading an input or writing an output failed."""

    exit_code = 3


class NumericalError(BeamlinkError):
    """A numerical or model error."""

    exit_code = 4


class GeometryError(NumericalError):
    """Degenerate vehicle geometry, e.g. co-located vehicles."""


class UnreachableAzimuthError(NumericalError):
    """No laser of the array can steer to the requested azimuth."""


class ReceiverOrientationError(NumericalError):
    """The receiver faces away from the beam (rotation >= pi/2)."""


class SpectrumRangeError(NumericalError):
    """Filter band is not covered by the solar spectrum."""


class TraceSupportError(NumericalError):
    """A trace was queried outside the time span it covers."""


class InsufficientHistoryError(TraceSupportError):
    """The delayed signaling value precedes the start of the trace."""


class SingularSystemError(NumericalError):
    """The Yule-Walker system cannot be solved."""


class NonStationaryModelError(NumericalError):
    """An autoregressive model has a root on or outside the unit circle."""


class EmptyInputError(NumericalError):
    """A statistic was requested over no samples."""
