"""Shared exception types."""

from __future__ import annotations


class RingSpectraError(Exception):
    """Base class for errors raised by this package."""


class ResourceLimitError(RingSpectraError):
    """A configured cap (sieve bound, relation tuple budget, ...) was exceeded."""


class ParseError(RingSpectraError):
    """Syntax or well-formedness error in formula or polynomial text.

    Carries a 1-based line/column position when one is known.
    """

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class DegenerateInputError(RingSpectraError):
    """Input degenerates under the requested reduction (e.g. f == 0 mod p)."""


class NoInverseError(RingSpectraError):
    """A modular inverse was requested for a non-invertible element."""
