"""Exception hierarchy shared by all wireoff modules."""


class WireoffError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(WireoffError):
    """An input value lies outside the mathematical domain of an operation."""


class AlignmentError(WireoffError):
    """Two series that must share a time range do not."""


class FitError(WireoffError):
    """A model fit failed (singular system, non-convergence, divergence)."""


class TuneError(WireoffError):
    """Every hyperparameter trial failed."""


class EstimationError(WireoffError):
    """An empirical distribution could not be estimated from the event log."""


class SimulationError(WireoffError):
    """The Monte Carlo simulation was asked to do something impossible."""


class ValidationError(WireoffError):
    """A validation routine received unusable data (too short, gaps too long)."""


class ParseError(WireoffError):
    """A data file contains a malformed row."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class GapError(WireoffError):
    """A time series has a gap longer than the interpolation policy allows."""
