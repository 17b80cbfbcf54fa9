"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class PovmRandError(Exception):
    """Base class for every error raised by this package."""


class InputError(PovmRandError, ValueError):
    """Malformed or out-of-range input."""


class NotHermitianError(InputError):
    pass


class NotPsdError(InputError):
    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class NotStateError(InputError):
    pass


class NotPovmError(InputError):
    pass


class DegeneratePovmError(InputError):
    """Parameters on the boundary of a family, where it collapses."""


class NotInformationallyCompleteError(InputError):
    pass


class PreconditionError(InputError):
    """An operation was called on an object outside its domain."""


class ConvergenceError(PovmRandError, ArithmeticError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class CertificationError(PovmRandError):
    """A computed value failed its own primal/dual consistency checks."""


class GridError(PovmRandError):
    """The sphere grid is too coarse for the requested state."""
