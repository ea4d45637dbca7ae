"""Exception hierarchy shared by all modules."""


class PenetraError(Exception):
    """Base class for all library errors."""


class InvalidShape(PenetraError):
    """Tensor shape does not match what the operation requires."""


class InvalidInput(PenetraError):
    """Non-shape precondition violated (empty list, non-finite values, bad flag)."""


class DegenerateVector(PenetraError):
    """Zero vector where a direction is required."""


class DegenerateEigenvalue(PenetraError):
    """Zero eigenvalue where a nonzero one is required."""


class FormatError(PenetraError):
    """Malformed tensor container (bad magic, header, or payload)."""


class OracleUnavailable(PenetraError):
    """External oracle could not be reached or violated the wire protocol."""


class OracleFault(PenetraError):
    """Oracle replied, but with unusable (non-finite) values."""


class NumericalFault(PenetraError):
    """A numerical kernel produced non-finite values.

    Carries diagnostic payload in ``details`` (e.g. the two one-sided
    evaluations of a finite-difference quotient).
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class TooLarge(PenetraError):
    """Requested dense object exceeds the materialization guard."""


class Breakdown(PenetraError):
    """Krylov iteration produced a zero restart vector twice in a row."""


class UnsupportedShape(PenetraError):
    """Oracle geometry the channel-broadcast adapter cannot handle."""
