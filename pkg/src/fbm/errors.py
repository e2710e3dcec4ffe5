"""Exception types carrying machine-readable error codes.

The CLI maps ValidationError to exit code 2 and NumericalError to exit
code 3; the ``code`` string is what lands in the error record on stderr.
"""

from __future__ import annotations


class FbmError(Exception):
    """Base class for errors with a stable machine-readable code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


class ValidationError(FbmError):
    """Configuration or precondition violation detected before computing."""


class NumericalError(FbmError):
    """Failure during computation (degenerate data, rank loss, SVD failure)."""
