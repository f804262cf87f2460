"""Exception types shared by the engine and the command line."""

from __future__ import annotations


class SyzygyError(Exception):
    """Base class for errors raised by this package."""


class ArgumentError(SyzygyError, ValueError):
    """An input is malformed or outside the domain of a formula."""


class PreconditionError(ArgumentError):
    """A mathematical hypothesis required by a bound does not hold."""


class ResourceError(SyzygyError):
    """A computation would exceed a configured size cap or the machine word.

    ``required`` carries the size that was asked for, ``where`` names the
    object (entry, strand, term) that triggered the cap.
    """

    def __init__(self, message: str, required: int | None = None, where: str | None = None):
        super().__init__(message)
        self.required = required
        self.where = where


class InvariantViolation(SyzygyError, AssertionError):
    """The engine produced a value contradicting a proven structural fact."""
