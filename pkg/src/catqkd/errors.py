"""Exception hierarchy shared by every module of the package."""


class CatQKDError(Exception):
    """Base class for all package errors."""


class DomainError(CatQKDError, ValueError):
    """A parameter lies outside the domain an operation accepts."""


class IntegrityError(CatQKDError, ArithmeticError):
    """A computed quantity violates a physical or structural invariant."""


class CutoffError(CatQKDError):
    """Fock-space truncation leaks more probability than allowed."""

    def __init__(self, message, suggested_cutoff=None):
        super().__init__(message)
        self.suggested_cutoff = suggested_cutoff


class NoDistanceError(CatQKDError):
    """The target key rate is not reached even at zero distance."""
