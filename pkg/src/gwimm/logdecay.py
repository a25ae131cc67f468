"""Estimation of the offspring mean through the log of the pair-average gap.

The centered pair average at a slowly growing lag decays geometrically in the
offspring mean, so one k-th of its log magnitude estimates the log of that
mean.  Smooth gates keep the statistic bounded: one clips the sample means to
a compact range, another switches the log off when the gap falls below the
scale the theory guarantees.  Everything the gates did to the raw statistic is
reported alongside the estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import EstimationError
from .models import BranchingModel
from .moments import (
    decay_amplitude,
    decay_amplitude_series,
    mean_pair_longrun_covariance,
    stationary_mean,
    stationary_second_moment,
)
from .ratio_estimator import pair_average

__all__ = [
    "smoothstep",
    "RegularizerConfig",
    "magnitude_gate",
    "range_gate",
    "gated_log",
    "log_window",
    "sqrt_window",
    "LogDecayEstimate",
    "estimate_log_decay",
    "ExpansionPrediction",
    "expansion_prediction",
    "amplitude_floor_when_positive",
    "config_for_model",
]


def smoothstep(x):
    """C^3 ramp: 0 below 0, 1 above 1, 35x^4 - 84x^5 + 70x^6 - 20x^7 between."""
    t = np.clip(x, 0.0, 1.0)
    out = t**4 * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)))
    if np.isscalar(x):
        return float(out)
    return out


def _default_log_rate(lam_lo: float) -> float:
    # largest admissible rate is -1/(2 ln lam_lo); stay just inside it
    return 0.99 * (-1.0 / (2.0 * math.log(lam_lo)))


@dataclass(frozen=True)
class RegularizerConfig:
    """Known a-priori bounds that define the gates.

    lam_lo and lam_hi bracket the offspring mean, amplitude_floor is a lower
    bound on the decay amplitude of the centered pair averages, moment_bound
    dominates both the first moment and the root second moment of the
    stationary law, and log_rate scales the logarithmic lag window.
    """

    amplitude_floor: float
    moment_bound: float
    lam_lo: float = 0.1
    lam_hi: float = 0.95
    log_rate: float | None = None

    def __post_init__(self):
        if not 0.0 < self.lam_lo <= self.lam_hi < 1.0:
            raise ValueError("need 0 < lam_lo <= lam_hi < 1")
        if not self.amplitude_floor > 0.0:
            raise ValueError("amplitude_floor must be positive")
        if not self.moment_bound > 0.0:
            raise ValueError("moment_bound must be positive")
        if self.log_rate is None:
            object.__setattr__(self, "log_rate", _default_log_rate(self.lam_lo))
        if not self.log_rate > 0.0:
            raise ValueError("log_rate must be positive")

    @property
    def plateau_end(self) -> float:
        return max(self.moment_bound, self.moment_bound**2)


def magnitude_gate(x, window: int, config: RegularizerConfig):
    """Gate that vanishes when x is small against the guaranteed decay scale
    amplitude_floor * lam_lo**window and equals 1 past that scale."""
    scale = config.amplitude_floor * config.lam_lo**window
    xs = np.asarray(x, dtype=float)
    if scale == 0.0:
        # the guaranteed scale underflowed; any positive magnitude clears it
        out = np.where(xs > 0.0, 1.0, 0.0)
    else:
        out = smoothstep(2.0 * xs / scale)
    if np.isscalar(x):
        return float(out)
    return out


def range_gate(x, config: RegularizerConfig):
    """Plateau gate: 1 on [0, plateau_end], smooth ramps of width 1 on both
    sides, 0 outside [-1, plateau_end + 1]."""
    m = config.plateau_end
    xs = np.asarray(x, dtype=float)
    out = np.where(
        xs <= 0.0,
        smoothstep(xs + 1.0),
        np.where(xs <= m, 1.0, smoothstep(m + 1.0 - xs)),
    )
    if np.isscalar(x):
        return float(out)
    return out


def gated_log(x, window: int, config: RegularizerConfig):
    """(1/window) * magnitude_gate(|x|) * ln|x|, defined as 0 at x = 0."""
    xs = np.asarray(x, dtype=float)
    nonzero = xs != 0.0
    weight = magnitude_gate(np.abs(xs), window, config)
    safe = np.where(nonzero, np.abs(xs), 1.0)
    out = np.where(nonzero, weight * np.log(safe) / window, 0.0)
    if np.isscalar(x):
        return float(out)
    return out


def log_window(n: int, rate: float) -> int:
    return int(math.floor(rate * math.log(n)))


def sqrt_window(n: int) -> int:
    return int(math.floor(math.sqrt(n)))


@dataclass(frozen=True)
class LogDecayEstimate:
    log_decay: float
    immigration_mean: float
    window: int
    n: int
    raw_log: float
    sample_mean: float
    pair_avg: float
    gates: dict = field(repr=False)

    @property
    def decay_factor(self) -> float:
        return math.exp(self.log_decay)


def _resolve_window(n: int, config: RegularizerConfig, window) -> int:
    if isinstance(window, (int, np.integer)):
        kn = int(window)
    elif window == "log":
        kn = log_window(n, config.log_rate)
    elif window == "sqrt":
        kn = sqrt_window(n)
    else:
        raise ValueError("window must be 'log', 'sqrt', or an explicit integer")
    if kn < 1:
        raise EstimationError(f"lag window is {kn}; n is too small for the chosen rate")
    return kn


def estimate_log_decay(
    values: np.ndarray,
    n: int,
    config: RegularizerConfig,
    window="log",
) -> LogDecayEstimate:
    """Estimate the log offspring mean from the first n + window + 1 values.

    The point estimate is the gated version of (1/window) * ln of the centered
    pair-average gap at lag window + 1; the immigration mean follows from the
    sample mean.  The ungated log and every gate value are reported so the
    effect of the regularization is visible.
    """
    kn = _resolve_window(n, config, window)
    values = np.asarray(values)
    if values.shape[0] < n + kn + 1:
        raise ValueError(f"need at least n + window + 1 = {n + kn + 1} values")
    ybar = float(np.mean(np.asarray(values[:n], dtype=float)))
    pair = pair_average(values, kn + 1, n)
    diff = ybar**2 - pair

    gate_mean = range_gate(ybar, config)
    gate_pair = range_gate(pair, config)
    gate_magnitude = magnitude_gate(abs(diff), kn, config)
    # one log evaluation feeds both, so fully open gates leave it untouched
    if diff != 0.0:
        log_mag = math.log(abs(diff))
        raw_log = log_mag / kn
        s_hat = gate_mean * gate_pair * gate_magnitude * log_mag / kn
    else:
        raw_log = -math.inf
        s_hat = 0.0
    return LogDecayEstimate(
        log_decay=float(s_hat),
        immigration_mean=ybar * (1.0 - math.exp(s_hat)),
        window=kn,
        n=n,
        raw_log=raw_log,
        sample_mean=ybar,
        pair_avg=pair,
        gates={
            "mean": float(gate_mean),
            "pair": float(gate_pair),
            "magnitude": float(gate_magnitude),
        },
    )


@dataclass(frozen=True)
class ExpansionPrediction:
    """Leading deterministic and stochastic terms of the estimation error."""

    window: int
    bias_term: float
    noise_scale: float
    sigma: float
    admissible: bool
    flags: tuple[str, ...]


def expansion_prediction(model: BranchingModel, n: int, config: RegularizerConfig, window="log") -> ExpansionPrediction:
    """Two-term error prediction for the log-decay estimator at sample size n.

    bias_term is ln|amplitude| / window; the stochastic term has standard
    deviation sqrt(sigma) * noise_scale with noise_scale =
    1 / (sqrt(n) * window * offspring_mean**window).  sigma comes from the
    long-run covariance of the sample mean paired with the lagged pair
    average, projected to the nearest positive semidefinite matrix.
    """
    kn = _resolve_window(n, config, window)
    lam = model.offspring_mean
    amp = decay_amplitude_series(model)
    flags = []

    big = mean_pair_longrun_covariance(model, variant="discounted")
    eigvals, eigvecs = np.linalg.eigh((big + big.T) / 2.0)
    if np.any(eigvals < 0.0):
        flags.append("longrun-matrix-clipped-to-psd")
    clipped = eigvecs @ np.diag(np.clip(eigvals, 0.0, None)) @ eigvecs.T
    c1 = stationary_mean(model)
    v = np.array([2.0 * c1 / abs(amp), -1.0 / abs(amp)])
    sigma = float(v @ clipped @ v)

    _, coef, ratio = model.immigration.cov_geometric_tail()
    zeta = abs(ratio) if coef != 0.0 else 0.0
    upper = -1.0 / (2.0 * math.log(config.lam_lo))
    lower = 0.0 if zeta == 0.0 else -1.0 / (2.0 * math.log(zeta))
    admissible = zeta < config.lam_lo and lower < config.log_rate < upper
    if zeta >= config.lam_lo:
        flags.append("immigration-covariance-decay-not-inside-lam-lo")
    if not lower < config.log_rate < upper:
        flags.append("log-rate-outside-admissible-window")

    return ExpansionPrediction(
        window=kn,
        bias_term=math.log(abs(amp)) / kn,
        noise_scale=1.0 / (math.sqrt(n) * kn * lam**kn),
        sigma=sigma,
        admissible=admissible,
        flags=tuple(flags),
    )


def amplitude_floor_when_positive(
    offspring_var_min: float,
    immigration_mean_min: float,
    immigration_var_min: float,
    lam_lo: float,
    lam_hi: float,
) -> float:
    """Valid amplitude floor when all immigration autocovariances are >= 0,
    from lower bounds on the model primitives alone."""
    one_minus_sq = 1.0 - lam_lo**2
    return (
        offspring_var_min * immigration_mean_min * lam_lo / (one_minus_sq * (1.0 + lam_hi))
        + immigration_var_min * lam_lo / one_minus_sq
    )


def config_for_model(
    model: BranchingModel,
    log_rate: float | None = None,
    lam_lo: float | None = None,
    lam_hi: float = 0.95,
    floor_scale: float = 1.0,
) -> RegularizerConfig:
    """Build gate bounds from a model's exact moments.

    This is the simulation-study convenience: the bracket and the floor are
    the exact values (the tightest admissible constants), and the moment
    bound dominates the exact first and root second moments.  floor_scale
    shrinks the amplitude floor below the exact amplitude if a safety margin
    is wanted.
    """
    if lam_lo is None:
        lam_lo = model.offspring_mean
    lam_hi = max(lam_hi, lam_lo)
    amp = abs(decay_amplitude(model))
    bound = max(stationary_mean(model), math.sqrt(stationary_second_moment(model)))
    return RegularizerConfig(
        amplitude_floor=floor_scale * amp,
        moment_bound=bound,
        lam_lo=lam_lo,
        lam_hi=lam_hi,
        log_rate=log_rate,
    )
