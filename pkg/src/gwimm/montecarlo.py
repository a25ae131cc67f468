"""Replicated sampling studies of the estimators.

Each study simulates independent trajectories from per-replication seeds
derived from one master seed, applies an estimator, and reduces the results
to summary statistics.  The reduction runs in replication-index order, so the
output is identical for any worker count.  Replications whose estimator
raises are counted and excluded; a study aborts if more than a tenth fail.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
import math
import os

import numpy as np

from .errors import EstimationError, TooManyFailuresError
from .logdecay import RegularizerConfig, _resolve_window, estimate_log_decay
from .models import BranchingModel
from .ratio_estimator import estimate_by_moments
from .simulate import replication_seed, simulate
from .spectral import analyze

__all__ = [
    "SummaryStats",
    "StudyResult",
    "summarize",
    "run_moment_study",
    "run_variance_study",
    "run_logdecay_study",
    "default_workers",
    "FAILURE_SHARE_LIMIT",
]

FAILURE_SHARE_LIMIT = 0.10


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    variance: float
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    count: int
    bias: float | None = None
    rmse: float | None = None


def summarize(samples: np.ndarray, target: float | None = None) -> SummaryStats:
    """Location and spread summaries; bias and rmse when a target is given."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("cannot summarize an empty sample")
    q1, med, q3 = np.quantile(x, [0.25, 0.5, 0.75])
    mean = float(np.mean(x))
    var = float(np.var(x))
    bias = rmse = None
    if target is not None:
        bias = mean - target
        rmse = float(np.sqrt(np.mean((x - target) ** 2)))
    return SummaryStats(
        mean=mean,
        variance=var,
        minimum=float(np.min(x)),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        maximum=float(np.max(x)),
        count=int(x.size),
        bias=bias,
        rmse=rmse,
    )


@dataclass(frozen=True)
class StudyResult:
    stats: dict[str, SummaryStats]
    samples: dict[str, np.ndarray]
    replications: int
    failures: int
    tracking: dict[str, float] | None = None


def default_workers() -> int:
    env = os.environ.get("GW_ESTIM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _moment_rep(task):
    model, lag, n, seed = task
    traj = simulate(model, n + lag, seed)
    try:
        est = estimate_by_moments(traj.values, lag, n)
    except EstimationError:
        return None
    return est.offspring_mean, est.immigration_mean


def _variance_rep(task):
    model, lag, n, seed, order = task
    traj = simulate(model, n + lag, seed)
    try:
        report = analyze(traj.values, lag, n, order)
        est = estimate_by_moments(traj.values, lag, n)
    except EstimationError:
        return None
    return (
        est.offspring_mean,
        est.immigration_mean,
        report.param_cov_spectral[0, 0],
        report.param_cov_cls[0, 0],
    )


def _logdecay_rep(task):
    model, config, n, window, seed = task
    traj = simulate(model, n + window + 1, seed)
    try:
        est = estimate_log_decay(traj.values, n, config, window)
    except EstimationError:
        return None
    return est.log_decay, est.decay_factor, est.immigration_mean


def _run(worker, tasks, workers):
    if workers is None:
        workers = default_workers()
    if workers <= 1:
        return [worker(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks, chunksize=chunk))


def _collect(raw, replications):
    rows = [r for r in raw if r is not None]
    failures = replications - len(rows)
    if failures > FAILURE_SHARE_LIMIT * replications:
        raise TooManyFailuresError(
            f"{failures} of {replications} replications failed"
        )
    return rows, failures


def run_moment_study(
    model: BranchingModel,
    lag: int,
    n: int,
    replications: int,
    master_seed: int,
    workers: int | None = None,
) -> StudyResult:
    """Sampling study of the moment-ratio estimator."""
    tasks = [
        (model, lag, n, replication_seed(master_seed, i)) for i in range(replications)
    ]
    rows, failures = _collect(_run(_moment_rep, tasks, workers), replications)
    r_hat = np.array([r[0] for r in rows])
    m_hat = np.array([r[1] for r in rows])
    samples = {"offspring_mean": r_hat, "immigration_mean": m_hat}
    stats = {
        "offspring_mean": summarize(r_hat, model.offspring_mean),
        "immigration_mean": summarize(m_hat, model.immigration_mean),
    }
    return StudyResult(stats=stats, samples=samples, replications=replications, failures=failures)


def run_variance_study(
    model: BranchingModel,
    lag: int,
    n: int,
    replications: int,
    master_seed: int,
    workers: int | None = None,
    order: int | None = None,
) -> StudyResult:
    """Moment-ratio study that also tracks both variance estimators.

    tracking holds the medians of the spectral and the least-squares variance
    estimates for the offspring mean, next to the scaled empirical mean square
    errors n * mean((estimate - truth)^2) they are meant to approximate.
    """
    tasks = [
        (model, lag, n, replication_seed(master_seed, i), order)
        for i in range(replications)
    ]
    rows, failures = _collect(_run(_variance_rep, tasks, workers), replications)
    r_hat = np.array([r[0] for r in rows])
    m_hat = np.array([r[1] for r in rows])
    var_sp = np.array([r[2] for r in rows])
    var_cls = np.array([r[3] for r in rows])
    samples = {
        "offspring_mean": r_hat,
        "immigration_mean": m_hat,
        "spectral_var": var_sp,
        "cls_var": var_cls,
    }
    stats = {
        "offspring_mean": summarize(r_hat, model.offspring_mean),
        "immigration_mean": summarize(m_hat, model.immigration_mean),
    }
    tracking = {
        "median_spectral_var": float(np.median(var_sp)),
        "median_cls_var": float(np.median(var_cls)),
        "scaled_mse_offspring": float(n * np.mean((r_hat - model.offspring_mean) ** 2)),
        "scaled_mse_immigration": float(n * np.mean((m_hat - model.immigration_mean) ** 2)),
    }
    return StudyResult(
        stats=stats,
        samples=samples,
        replications=replications,
        failures=failures,
        tracking=tracking,
    )


def run_logdecay_study(
    model: BranchingModel,
    config: RegularizerConfig,
    n: int,
    replications: int,
    master_seed: int,
    workers: int | None = None,
    window="log",
) -> StudyResult:
    """Sampling study of the gated log-decay estimator."""
    kn = _resolve_window(n, config, window)
    tasks = [
        (model, config, n, kn, replication_seed(master_seed, i))
        for i in range(replications)
    ]
    rows, failures = _collect(_run(_logdecay_rep, tasks, workers), replications)
    s_hat = np.array([r[0] for r in rows])
    factor = np.array([r[1] for r in rows])
    m_hat = np.array([r[2] for r in rows])
    samples = {"log_decay": s_hat, "decay_factor": factor, "immigration_mean": m_hat}
    stats = {
        "log_decay": summarize(s_hat, math.log(model.offspring_mean)),
        "decay_factor": summarize(factor, model.offspring_mean),
        "immigration_mean": summarize(m_hat, model.immigration_mean),
    }
    tracking = {"window": float(kn)}
    return StudyResult(
        stats=stats,
        samples=samples,
        replications=replications,
        failures=failures,
        tracking=tracking,
    )
