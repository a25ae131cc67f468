"""Moment-based parameter estimation from a trajectory.

The offspring mean is estimated by the ratio of two centered pair averages at
consecutive lags, and the immigration mean follows from the sample mean.  The
same map from the moment triple to the parameters, together with its exact
Jacobian, feeds the variance estimators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMomentsError, EstimationError

__all__ = [
    "pair_average",
    "params_from_moments",
    "params_from_moments_jacobian",
    "MomentRatioEstimate",
    "estimate_by_moments",
    "cls_param_covariance",
]

_DEGENERATE_TOL = 1e-12


def pair_average(values: np.ndarray, lag: int, n: int) -> float:
    """Average of the n products values[j] * values[j + lag]."""
    if lag < 0:
        raise ValueError("lag must be >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    if values.shape[0] < n + lag:
        raise ValueError(f"need at least n + lag = {n + lag} values, got {values.shape[0]}")
    head = np.asarray(values[:n], dtype=float)
    tail = np.asarray(values[lag : n + lag], dtype=float)
    return float(head @ tail) / n


def params_from_moments(mean: float, pair_low: float, pair_high: float) -> tuple[float, float]:
    """Map (mean, pair average at lag k-1, pair average at lag k) to the
    (offspring mean, immigration mean) pair via the ratio of centered gaps."""
    denom = mean**2 - pair_low
    if denom == 0.0:
        raise DegenerateMomentsError("centered pair average at the lower lag vanishes")
    ratio = (mean**2 - pair_high) / denom
    return ratio, mean * (1.0 - ratio)


def params_from_moments_jacobian(mean: float, pair_low: float, pair_high: float) -> np.ndarray:
    """Exact 3x2 Jacobian of `params_from_moments`.

    Rows follow the argument order (mean, pair_low, pair_high); columns are
    the two outputs (offspring mean, immigration mean).
    """
    a, b, c = mean, pair_low, pair_high
    d = a**2 - b
    if d == 0.0:
        raise DegenerateMomentsError("centered pair average at the lower lag vanishes")
    num = a**2 - c
    dr_da = 2.0 * a * (c - b) / d**2
    dr_db = num / d**2
    dr_dc = -1.0 / d
    ratio = num / d
    return np.array(
        [
            [dr_da, 1.0 - ratio - a * dr_da],
            [dr_db, -a * dr_db],
            [dr_dc, -a * dr_dc],
        ]
    )


@dataclass(frozen=True)
class MomentRatioEstimate:
    offspring_mean: float
    immigration_mean: float
    lag: int
    n: int
    sample_mean: float
    pair_low: float
    pair_high: float


def estimate_by_moments(values: np.ndarray, lag: int, n: int) -> MomentRatioEstimate:
    """Estimate (offspring mean, immigration mean) from the first n + lag values.

    `lag` is the upper lag of the pair-average ratio; it must be >= 1.  The
    offspring-mean estimate is deliberately not clamped to (0, 1): in small
    samples it can fall outside, and the sampling studies need to see that.
    """
    if lag < 1:
        raise ValueError("lag must be >= 1")
    values = np.asarray(values)
    ybar = float(np.mean(np.asarray(values[:n], dtype=float)))
    pair_low = pair_average(values, lag - 1, n)
    pair_high = pair_average(values, lag, n)
    if abs(ybar**2 - pair_low) < _DEGENERATE_TOL:
        raise DegenerateMomentsError(
            "centered pair average at the lower lag is numerically zero"
        )
    r_hat, m_hat = params_from_moments(ybar, pair_low, pair_high)
    return MomentRatioEstimate(
        offspring_mean=r_hat,
        immigration_mean=m_hat,
        lag=lag,
        n=n,
        sample_mean=ybar,
        pair_low=pair_low,
        pair_high=pair_high,
    )


def cls_param_covariance(values: np.ndarray, n: int, offspring_mean: float, immigration_mean: float) -> np.ndarray:
    """Sandwich covariance of the conditional least squares parameter pair.

    Treats each step as the regression Y_t = r * Y_{t-1} + m + e_t with
    regressor d_t = (Y_{t-1}, 1) and returns J^{-1} W J^{-1} built from the
    empirical second moments of d_t and of e_t d_t.
    """
    if values.shape[0] < n + 1:
        raise ValueError(f"need at least n + 1 = {n + 1} values")
    y = np.asarray(values[: n + 1], dtype=float)
    prev, cur = y[:-1], y[1:]
    resid = cur - offspring_mean * prev - immigration_mean
    d = np.column_stack([prev, np.ones(n)])
    j = d.T @ d / n
    w = (d * resid[:, None]).T @ (d * resid[:, None]) / n
    try:
        j_inv = np.linalg.inv(j)
    except np.linalg.LinAlgError as exc:
        raise EstimationError("regressor second-moment matrix is singular") from exc
    omega = j_inv @ w @ j_inv
    return (omega + omega.T) / 2.0
