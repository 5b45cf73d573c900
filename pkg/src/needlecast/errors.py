"""Exception types shared across the package."""

from __future__ import annotations


class NeedlecastError(Exception):
    """Base class for all package errors."""


class DomainError(NeedlecastError, ValueError):
    """An argument lies outside the domain of the model."""


class CapacityError(NeedlecastError, ValueError):
    """A size parameter exceeds a configured cap."""


class ConvergenceError(NeedlecastError, RuntimeError):
    """An adaptive computation stopped before reaching its tolerance.

    The best available estimate is kept on the exception so callers can
    decide whether it is good enough.
    """

    def __init__(self, message: str, best=None, err_est=None, evals: int = 0):
        super().__init__(message)
        self.best = best
        self.err_est = err_est
        self.evals = evals
