"""
Error hierarchy shared by the computational modules and the commands.

Library code raises these; commands map them onto exit codes.
"""


class MagicSquaresError(Exception):
    """Base class for every error raised by the squares app."""


class ValidationError(MagicSquaresError, ValueError):
    """An argument is outside the domain of the operation."""


class GuardViolation(ValidationError):
    """An exhaustive search was requested on a system that is too large for it."""


class ConfigError(ValidationError):
    """A RunConfig could not be validated."""


class PrecisionError(MagicSquaresError):
    """The requested tolerance is finer than the working precision can honour."""


class BudgetExceeded(MagicSquaresError):
    """
    A computation needs more than its budget.

    Attributes:
        partial: Whatever partial result was assembled before stopping, or None
        resume_token: Opaque string that lets the caller continue, or None
    """

    def __init__(self, message, partial=None, resume_token=None):
        super().__init__(message)
        self.partial = partial
        self.resume_token = resume_token
