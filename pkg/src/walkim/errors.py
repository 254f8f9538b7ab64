"""Exception types shared across the package.

The CLI maps these onto exit codes: EdgeListParseError and DomainError
exit with 3, CapacityError with 4, IO problems with 5.
"""


class EdgeListParseError(ValueError):
    """Malformed edge-list input (carries the offending line number)."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DomainError(ValueError):
    """A value violates a documented precondition (probability range,
    self-loop, duplicate edge, unknown vertex label, ...)."""


class CapacityError(RuntimeError):
    """An exact enumeration was requested beyond the guard limits."""
