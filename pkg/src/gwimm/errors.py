"""Shared exception types."""
from __future__ import annotations

__all__ = [
    "EstimationError",
    "DegenerateMomentsError",
    "SeriesResonanceError",
    "TooManyFailuresError",
]


class EstimationError(Exception):
    """An estimator could not produce a value from the given trajectory."""


class DegenerateMomentsError(EstimationError):
    """The moment combination feeding a ratio estimate has a vanishing denominator."""


class SeriesResonanceError(ValueError):
    """A closed-form series value does not exist because the immigration
    covariance decay rate coincides exactly with the offspring mean."""


class TooManyFailuresError(RuntimeError):
    """More than the tolerated share of Monte Carlo replications failed."""
