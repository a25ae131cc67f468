"""Long-run covariance of the moment triple via an autoregressive spectral fit.

The sample mean and the two pair averages feeding the ratio estimator are
jointly asymptotically normal; their long-run covariance is estimated by
fitting a vector autoregression to the centered product series and reading
off the spectral density at frequency zero.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg

from .errors import EstimationError
from .ratio_estimator import pair_average, params_from_moments_jacobian

__all__ = [
    "CenteredProducts",
    "centered_product_series",
    "VarFit",
    "fit_var",
    "long_run_covariance",
    "ratio_param_covariance",
    "default_order",
    "aic_order",
    "LrvReport",
    "analyze",
]

_RIDGE_SCALE = 1e-8
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class CenteredProducts:
    """The centered series (n, 3) behind the moment triple, plus the triple."""

    values: np.ndarray
    triple: tuple[float, float, float]
    lag: int
    n: int


def centered_product_series(values: np.ndarray, lag: int, n: int) -> CenteredProducts:
    """Center (Y_t, Y_t Y_{t+lag-1}, Y_t Y_{t+lag}) at their sample means."""
    if lag < 1:
        raise ValueError("lag must be >= 1")
    values = np.asarray(values)
    if values.shape[0] < n + lag:
        raise ValueError(f"need at least n + lag = {n + lag} values")
    y = np.asarray(values[: n + lag], dtype=float)
    ybar = float(np.mean(y[:n]))
    pair_low = pair_average(values, lag - 1, n)
    pair_high = pair_average(values, lag, n)
    out = np.column_stack(
        [
            y[:n] - ybar,
            y[:n] * y[lag - 1 : n + lag - 1] - pair_low,
            y[:n] * y[lag : n + lag] - pair_high,
        ]
    )
    return CenteredProducts(values=out, triple=(ybar, pair_low, pair_high), lag=lag, n=n)


@dataclass(frozen=True)
class VarFit:
    coeffs: np.ndarray  # (order, dim, dim), lag-k matrix at index k-1
    residuals: np.ndarray  # (n - order, dim)
    residual_cov: np.ndarray  # (dim, dim), normalized by the series length n
    orthogonality: float  # max abs entry of (1/n) * regressors' residuals
    ridge_used: bool


def fit_var(series: np.ndarray, order: int) -> VarFit:
    """Least-squares fit of a vector autoregression of the given order.

    The normal equations are solved through a Cholesky factorization; if the
    Gram matrix is not numerically positive definite, a small ridge
    proportional to its mean diagonal is added once and the fit is flagged.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 2:
        raise ValueError("series must be two-dimensional (time by component)")
    n, dim = series.shape
    if order < 1:
        raise ValueError("order must be >= 1")
    if n - order < dim * order + dim:
        raise EstimationError(
            f"series of length {n} is too short for order {order}: "
            f"need n - order >= {dim * order + dim}"
        )
    rows = n - order
    x = np.empty((rows, dim * order))
    for k in range(1, order + 1):
        x[:, (k - 1) * dim : k * dim] = series[order - k : n - k]
    y = series[order:]

    gram = x.T @ x
    xty = x.T @ y
    ridge_used = False
    try:
        chol = scipy.linalg.cho_factor(gram, lower=True)
    except scipy.linalg.LinAlgError:
        ridge = _RIDGE_SCALE * np.trace(gram) / gram.shape[0]
        if not ridge > 0.0:
            raise EstimationError("regressor Gram matrix is zero; series is degenerate")
        gram = gram + ridge * np.eye(gram.shape[0])
        try:
            chol = scipy.linalg.cho_factor(gram, lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise EstimationError("regressor Gram matrix is not positive definite") from exc
        ridge_used = True
    beta = scipy.linalg.cho_solve(chol, xty)  # (dim*order, dim)

    resid = y - x @ beta
    coeffs = np.empty((order, dim, dim))
    for k in range(1, order + 1):
        coeffs[k - 1] = beta[(k - 1) * dim : k * dim, :].T
    residual_cov = resid.T @ resid / n
    orthogonality = float(np.max(np.abs(x.T @ resid))) / n
    return VarFit(
        coeffs=coeffs,
        residuals=resid,
        residual_cov=residual_cov,
        orthogonality=orthogonality,
        ridge_used=ridge_used,
    )


def long_run_covariance(fit: VarFit) -> np.ndarray:
    """Spectral-density-at-zero estimate implied by a VAR fit, symmetrized."""
    dim = fit.residual_cov.shape[0]
    a_one = np.eye(dim) - fit.coeffs.sum(axis=0)
    # the comparison is written so that a nan/inf condition number also raises
    if not np.all(np.isfinite(a_one)) or not np.linalg.cond(a_one) <= _COND_LIMIT:
        raise EstimationError("lag polynomial is numerically singular at one (near unit root)")
    inv = np.linalg.inv(a_one)
    out = inv @ fit.residual_cov @ inv.T
    return (out + out.T) / 2.0


def ratio_param_covariance(long_run: np.ndarray, triple: tuple[float, float, float]) -> np.ndarray:
    """Map the moment-triple long-run covariance to the parameter pair by the
    exact Jacobian of the moments-to-parameters map (delta method)."""
    jac = params_from_moments_jacobian(*triple)
    out = jac.T @ np.asarray(long_run, dtype=float) @ jac
    return (out + out.T) / 2.0


def default_order(n: int) -> int:
    """Largest integer strictly below the cube root of n, floored at 1."""
    root = n ** (1.0 / 3.0)
    nearest = round(root)
    if nearest**3 == n:
        return max(1, nearest - 1)
    return max(1, math.ceil(root) - 1)


def aic_order(series: np.ndarray, max_order: int) -> int:
    """Order in 1..max_order minimizing ln det(residual cov) + 2 r d^2 / n."""
    series = np.asarray(series, dtype=float)
    n, dim = series.shape
    best, best_val = None, np.inf
    for order in range(1, max_order + 1):
        fit = fit_var(series, order)
        sign, logdet = np.linalg.slogdet(fit.residual_cov)
        if sign <= 0:
            continue
        val = logdet + 2.0 * order * dim**2 / n
        if val < best_val:
            best, best_val = order, val
    if best is None:
        raise EstimationError("no autoregressive order produced a valid residual covariance")
    return best


@dataclass(frozen=True)
class LrvReport:
    order: int
    triple: tuple[float, float, float]
    long_run_cov: np.ndarray
    param_cov_spectral: np.ndarray
    param_cov_cls: np.ndarray
    orthogonality: float
    ridge_used: bool


def analyze(values: np.ndarray, lag: int, n: int, order: int | None = None) -> LrvReport:
    """Full variance analysis of the ratio estimator on one trajectory:
    spectral parameter covariance next to the conditional-least-squares one."""
    from .ratio_estimator import cls_param_covariance, estimate_by_moments

    est = estimate_by_moments(values, lag, n)
    centered = centered_product_series(values, lag, n)
    if order is None:
        order = default_order(n)
    fit = fit_var(centered.values, order)
    long_run = long_run_covariance(fit)
    param_sp = ratio_param_covariance(long_run, centered.triple)
    param_cls = cls_param_covariance(values, n, est.offspring_mean, est.immigration_mean)
    return LrvReport(
        order=order,
        triple=centered.triple,
        long_run_cov=long_run,
        param_cov_spectral=param_sp,
        param_cov_cls=param_cls,
        orthogonality=fit.orthogonality,
        ridge_used=fit.ridge_used,
    )
