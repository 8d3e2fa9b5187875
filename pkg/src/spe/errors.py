"""Exception types shared across the package."""

from __future__ import annotations


class BlowUpError(RuntimeError):
    """Raised when the time stepper produces non-finite values.

    Carries the simulation time at which the failure was detected, so callers
    can report how far the run got before breaking down.
    """

    def __init__(self, time: float, message: str | None = None):
        self.time = time
        super().__init__(message or f"solution blew up at t={time:.6g}")


class DataValidationError(ValueError):
    """Input data violates an admissibility requirement of the problem.

    ``violations`` lists every violated condition, each phrased in terms of
    the mathematical assumption it maps to.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
