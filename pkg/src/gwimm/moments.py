"""Exact stationary moments of the process.

Everything here is closed form (no simulation): the stationary mean and
second moment, lagged product moments E(Y_0 Y_k), the geometric-decay
amplitude of the centered product moments, and the long-run covariance
matrix of the sample mean paired with a lagged pair average.

The centered product moments obey

    mean^2 - E(Y_0 Y_{k+1}) = amplitude * offspring_mean^k * (1 + o(1)),

and the amplitude is available through two independent routes (a direct
closed form and a term-by-term series) that agree to machine precision.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import SeriesResonanceError
from .models import BranchingModel

__all__ = [
    "stationary_mean",
    "stationary_second_moment",
    "product_moment",
    "product_moment_gap",
    "decay_amplitude_partial",
    "decay_amplitude_series",
    "decay_amplitude_direct",
    "decay_amplitude",
    "mean_pair_longrun_covariance",
]

_REL_TOL = 1e-14
_MAX_TERMS = 100_000


def stationary_mean(model: BranchingModel) -> float:
    """E(Y) under stationarity."""
    return model.immigration_mean / (1.0 - model.offspring_mean)


def stationary_second_moment(model: BranchingModel) -> float:
    """E(Y^2) under stationarity."""
    lam = model.offspring_mean
    m = model.immigration_mean
    v_off = model.offspring_variance
    eps_sq = model.immigration_variance + m**2
    f_lam = model.immigration.cov_generating_fn(lam)
    inner = v_off * m / (1.0 - lam) + 2.0 * lam * (m**2 / (1.0 - lam) + f_lam) + eps_sq
    return inner / (1.0 - lam**2)


def _chi(model: BranchingModel, j: int) -> float:
    """Negated discounted tail of immigration autocovariances from lag j+1 on.

    chi_j = -sum_{i>=0} offspring_mean^i * autocov(j+1+i), evaluated exactly
    by splitting off the geometric tail of the autocovariances.
    """
    lam = model.offspring_mean
    law = model.immigration
    start, coef, ratio = law.cov_geometric_tail()
    total = 0.0
    # explicit head: lags j+1 .. start-1
    for h in range(j + 1, start):
        total += law.autocovariance(h) * lam ** (h - j - 1)
    # geometric tail from lag h0 = max(j+1, start); |ratio * lam| < 1 always
    if coef != 0.0:
        h0 = max(j + 1, start)
        total += coef * ratio**h0 * lam ** (h0 - j - 1) / (1.0 - ratio * lam)
    return -total


def _chi_weighted_sum(model: BranchingModel, a: float) -> float:
    """sum_{j>=0} a^j chi_j via exact head plus geometric tail.

    For |a * tail_ratio| < 1 this is the convergent series value; otherwise it
    is the analytic continuation of the same rational expression in the tail
    ratio, which is the value every downstream identity uses.
    """
    lam = model.offspring_mean
    start, coef, ratio = model.immigration.cov_geometric_tail()
    j0 = max(start - 1, 0)
    total = 0.0
    for j in range(j0):
        total += a**j * _chi(model, j)
    # for j >= j0: chi_j = -coef * ratio^(j+1) / (1 - ratio*lam) exactly
    if coef != 0.0:
        # near-resonant tails amplify rounding by 1/(1 - a*ratio); refuse them
        if abs(1.0 - a * ratio) < 1e-9:
            raise SeriesResonanceError(
                "tail ratio equals the series weight; no closed-form sum exists"
            )
        total += -coef * ratio / (1.0 - ratio * lam) * (a * ratio) ** j0 / (1.0 - a * ratio)
    return total


def decay_amplitude_partial(model: BranchingModel, k: int) -> float:
    """Finite-lag amplitude: (mean^2 - E(Y_0 Y_{k+1})) / offspring_mean^k."""
    if k < 0:
        raise ValueError("lag must be >= 0")
    lam = model.offspring_mean
    c1 = stationary_mean(model)
    c2 = stationary_second_moment(model)
    total = lam * (c1**2 - c2)
    for j in range(k + 1):
        total += lam ** (-j) * _chi(model, j)
    return total


def product_moment_gap(model: BranchingModel, k: int) -> float:
    """mean^2 - E(Y_0 Y_{k+1}) for k >= -1, computed in a stable recursion."""
    c1 = stationary_mean(model)
    c2 = stationary_second_moment(model)
    if k < -1:
        raise ValueError("lag must be >= -1")
    lam = model.offspring_mean
    gap = c1**2 - c2
    for j in range(k + 1):
        gap = lam * gap + _chi(model, j)
    return gap


def product_moment(model: BranchingModel, k: int) -> float:
    """E(Y_0 Y_k) under stationarity, for k >= 0."""
    if k < 0:
        raise ValueError("lag must be >= 0")
    return stationary_mean(model) ** 2 - product_moment_gap(model, k - 1)


def decay_amplitude_series(model: BranchingModel) -> float:
    """Amplitude of the geometric decay of mean^2 - E(Y_0 Y_{k+1}), via the
    term-by-term series over the discounted covariance tails."""
    lam = model.offspring_mean
    c1 = stationary_mean(model)
    c2 = stationary_second_moment(model)
    return _chi_weighted_sum(model, 1.0 / lam) + lam * (c1**2 - c2)


def decay_amplitude_direct(
    offspring_mean: float,
    immigration_mean: float,
    offspring_variance: float,
    immigration_variance: float,
    cov_generating_fn,
) -> float:
    """Closed form for the decay amplitude from the model primitives.

    `cov_generating_fn` must be evaluable at both the offspring mean and its
    reciprocal (for geometrically decaying covariances this is the analytic
    continuation of the defining power series).
    """
    lam = offspring_mean
    one_minus_sq = 1.0 - lam**2
    return (
        -offspring_variance * immigration_mean * lam / (one_minus_sq * (1.0 - lam))
        - immigration_variance * lam / one_minus_sq
        - lam**2 * cov_generating_fn(lam) / one_minus_sq
        - cov_generating_fn(1.0 / lam) / one_minus_sq
    )


def decay_amplitude(model: BranchingModel) -> float:
    """Decay amplitude of the model (direct closed form)."""
    law = model.immigration
    try:
        return decay_amplitude_direct(
            model.offspring_mean,
            model.immigration_mean,
            model.offspring_variance,
            model.immigration_variance,
            law.cov_generating_fn,
        )
    except ValueError as exc:
        raise SeriesResonanceError(str(exc)) from exc


def _gap_series_sums(model: BranchingModel) -> tuple[float, float]:
    """(sum_k gap(k), sum_k gap(k)^2) over k >= 0, adaptively truncated.

    gap(k) = mean^2 - E(Y_0 Y_{k+1}) decays geometrically, so both series
    converge for every admissible model.
    """
    lam = model.offspring_mean
    c1 = stationary_mean(model)
    c2 = stationary_second_moment(model)
    gap = c1**2 - c2
    total = 0.0
    total_sq = 0.0
    scale = max(abs(gap), 1e-30)
    for k in range(_MAX_TERMS):
        gap = lam * gap + _chi(model, k)
        total += gap
        total_sq += gap * gap
        scale = max(scale, abs(total))
        if abs(gap) <= _REL_TOL * scale:
            return total, total_sq
    raise RuntimeError("product-moment series failed to settle within the term cap")


def mean_pair_longrun_covariance(model: BranchingModel, variant: str = "discounted") -> np.ndarray:
    """Long-run 2x2 covariance matrix of (sample mean, lagged pair average).

    variant="discounted" weights the cross covariance tail by inverse powers
    of the offspring mean; variant="plain" uses unit weights.  The discounted
    weighting uses the same closed-form tail continuation as the decay
    amplitude when the immigration covariance decay is not inside the
    offspring-mean radius.
    """
    if variant not in ("discounted", "plain"):
        raise ValueError("variant must be 'discounted' or 'plain'")
    lam = model.offspring_mean
    m = model.immigration_mean
    c1 = stationary_mean(model)
    c2 = stationary_second_moment(model)
    gap_sum, gap_sq_sum = _gap_series_sums(model)
    chi_plain = _chi_weighted_sum(model, 1.0)
    if variant == "discounted":
        cross_tail = _chi_weighted_sum(model, 1.0 / lam) / lam
    else:
        cross_tail = chi_plain

    s11 = 2.0 * gap_sum
    s12 = (
        -2.0 * m / (1.0 - lam) ** 2 * chi_plain
        + c1 * (c2 - c1**2) / (1.0 - lam)
        - 3.0 * c1 * gap_sum
    )
    s22 = (
        c2**2
        - c1**4
        + 2.0 * (gap_sq_sum - 2.0 * c1**2 * gap_sum)
        + 2.0 * c1**2 * ((c2 - c1**2) - gap_sum)
        - 2.0 * c1 * m / (1.0 - lam) ** 2 * cross_tail
    )
    return np.array([[s11, s12], [s12, s22]], dtype=float)
