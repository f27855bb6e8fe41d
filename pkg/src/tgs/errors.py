"""Exception hierarchy shared by every module."""

from __future__ import annotations


class TGSError(Exception):
    """Base class for all errors raised by the package."""


class StructuralError(TGSError):
    """A table is malformed: wrong shape or an entry out of range."""

    def __init__(self, message: str, cell: tuple | None = None):
        super().__init__(message)
        self.cell = cell


class PreconditionError(TGSError):
    """An operation was called on inputs outside its domain."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class LocalizationError(TGSError):
    """Fraction operations are not well defined on classes."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class BudgetExceeded(TGSError):
    """A search would exceed its configured budget."""

    def __init__(self, message: str, estimate: int, budget: int):
        super().__init__(message)
        self.estimate = estimate
        self.budget = budget


class GuardExceeded(TGSError):
    """Census feasibility guard refused the request."""

    def __init__(self, message: str, search_space: int):
        super().__init__(message)
        self.search_space = search_space


class CheckpointError(TGSError):
    """A checkpoint file could not be used to resume."""


class UnsupportedMode(TGSError):
    """The requested computation is only defined in another mode."""
