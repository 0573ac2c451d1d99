"""Exception hierarchy shared by every module."""


class WalleniusError(Exception):
    """Base class for all package errors."""


class DomainError(WalleniusError, ValueError):
    """Input outside the domain of an operation (bad dimension, weight, count)."""


class ValidationError(DomainError):
    """A dataset or file failed schema or feasibility validation."""


class ParseError(ValidationError):
    """A data file does not follow the expected CSV schema."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapacityError(WalleniusError):
    """An exact enumeration would exceed its configured size cap."""


class FlatLikelihoodError(WalleniusError):
    """Every table is degenerate, so the likelihood carries no information."""


class BoundaryIntervalError(WalleniusError):
    """A two-sided interval was requested for an estimate on the simplex edge."""


class SampleSizeError(WalleniusError):
    """Too few samples for the requested summary."""
