"""
QVBS v1 - Exceptions

Argument errors derive from ValueError so callers that only know the
standard library still catch them. Numerical mismatches are never raised
by the verifiers; they are reported (see CheckFailedError for the opt-in).
"""


class QVBSError(Exception):
    """Base class for all qvbs errors."""


class InvalidParameterError(QVBSError, ValueError):
    """A parameter is outside the domain of the operation."""


class InvalidDeformationError(InvalidParameterError):
    """The deformation parameter q is not a finite positive real."""


class InvalidSpinError(InvalidParameterError):
    """A spin label, block index or spin triple is out of range."""


class BudgetExceededError(QVBSError, ValueError):
    """A dense object would exceed the configured memory budget."""


class CheckFailedError(QVBSError):
    """Raised by require_pass() when a verification report has failures."""

    def __init__(self, failures: list[str]):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures) or "verification failed")


def require_pass(*reports) -> None:
    """Raise CheckFailedError with the combined error_messages of any failed report."""
    failures = [message for report in reports for message in report.error_messages]
    if failures:
        raise CheckFailedError(failures)
