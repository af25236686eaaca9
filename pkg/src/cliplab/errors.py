"""Exception hierarchy shared by all modules.

Exit-code mapping for the CLI: validation problems exit 2, I/O and file
format problems exit 3, numeric failures exit 4.
"""

from __future__ import annotations


class CliplabError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ValidationError(CliplabError):
    """A precondition or parameter constraint was violated."""

    exit_code = 2


class ParameterError(ValidationError):
    """An argument is outside its allowed range."""


class NotFoundError(ValidationError):
    """A referenced video or clip id does not exist."""


class BudgetExhaustedError(ValidationError):
    """The annotation budget is spent; the round cannot advance."""


class JobConflictError(ValidationError):
    """A background job is already running."""


class IoError(CliplabError):
    """Reading or writing an artifact file failed."""

    exit_code = 3


class FormatError(IoError):
    """A file exists but its contents violate the on-disk contract."""


class RefreshError(IoError):
    """A feature refresh is incompatible with the current dataset."""


class NumericError(CliplabError):
    """A numeric computation failed."""

    exit_code = 4


class DegenerateInputError(NumericError):
    """Input degenerate beyond what the algorithm can calibrate."""


class OptimizationError(NumericError):
    """The embedding optimizer diverged.

    Carries the KL trace accumulated up to the failure.
    """

    def __init__(self, message: str, trace: list[tuple[int, float]] | None = None):
        super().__init__(message)
        self.trace = list(trace or [])
