import numpy as np
import pytest

import gwimm
from gwimm.errors import EstimationError
from gwimm.spectral import VarFit


def _simulate_var1(phi, n, seed, warmup=200):
    rng = np.random.default_rng(seed)
    dim = phi.shape[0]
    x = np.zeros((n + warmup, dim))
    noise = rng.standard_normal((n + warmup, dim))
    for t in range(1, n + warmup):
        x[t] = phi @ x[t - 1] + noise[t]
    return x[warmup:]


def test_centered_series_has_zero_means_and_consistent_triple():
    model = gwimm.BranchingModel(gwimm.PoissonReproduction(0.5), gwimm.ProductPoissonImmigration(2))
    y = gwimm.simulate(model, 1005, seed=9).values
    cp = gwimm.centered_product_series(y, 2, 1000)
    assert cp.values.shape == (1000, 3)
    assert np.allclose(cp.values.mean(axis=0), 0.0, atol=1e-10)
    est = gwimm.estimate_by_moments(y, 2, 1000)
    assert cp.triple == (est.sample_mean, est.pair_low, est.pair_high)


def test_centered_series_validation():
    y = np.arange(20)
    with pytest.raises(ValueError):
        gwimm.centered_product_series(y, 0, 10)
    with pytest.raises(ValueError):
        gwimm.centered_product_series(y, 3, 18)


def test_fit_var_length_precondition():
    series = np.random.default_rng(0).standard_normal((10, 3))
    with pytest.raises(EstimationError):
        gwimm.fit_var(series, 2)  # needs n - 2 >= 9
    with pytest.raises(ValueError):
        gwimm.fit_var(series, 0)
    with pytest.raises(ValueError):
        gwimm.fit_var(series[:, 0], 1)


def test_fit_var_recovers_a_known_autoregression():
    phi = np.array([[0.5, 0.1, 0.0], [0.0, 0.3, 0.2], [0.1, 0.0, 0.4]])
    series = _simulate_var1(phi, 40_000, seed=12)
    fit = gwimm.fit_var(series, 1)
    assert fit.coeffs.shape == (1, 3, 3)
    assert np.allclose(fit.coeffs[0], phi, atol=0.03)
    assert fit.orthogonality < 1e-8
    assert not fit.ridge_used
    # innovations are standard normal, so the residual covariance is near identity
    assert np.allclose(fit.residual_cov, np.eye(3), atol=0.05)
    # spectral density at zero: (I - phi)^-1 Sigma (I - phi)^-T
    inv = np.linalg.inv(np.eye(3) - phi)
    target = inv @ inv.T
    assert np.allclose(gwimm.long_run_covariance(fit), target, rtol=0.1, atol=0.1)


def test_white_noise_long_run_matches_residual_covariance():
    series = np.random.default_rng(5).standard_normal((20_000, 3))
    fit = gwimm.fit_var(series, 2)
    assert np.all(np.abs(fit.coeffs) < 0.05)
    s = gwimm.long_run_covariance(fit)
    assert np.allclose(s, fit.residual_cov, rtol=0.1, atol=0.05)
    assert np.array_equal(s, s.T)


def test_residual_covariance_normalized_by_series_length():
    series = np.random.default_rng(7).standard_normal((500, 3))
    fit = gwimm.fit_var(series, 3)
    n = series.shape[0]
    assert fit.residuals.shape == (n - 3, 3)
    recomputed = fit.residuals.T @ fit.residuals / n
    assert np.array_equal(fit.residual_cov, recomputed)


def test_ridge_fallback_on_a_degenerate_column():
    rng = np.random.default_rng(11)
    series = np.column_stack(
        [rng.standard_normal(200), rng.standard_normal(200), np.zeros(200)]
    )
    fit = gwimm.fit_var(series, 1)
    assert fit.ridge_used
    assert np.all(np.isfinite(fit.coeffs))


def test_all_zero_series_is_rejected():
    with pytest.raises(EstimationError):
        gwimm.fit_var(np.zeros((50, 3)), 1)


def test_long_run_covariance_rejects_a_unit_root_polynomial():
    resid = np.zeros((10, 3))
    fit = VarFit(
        coeffs=np.diag([1.0, 0.5, 0.25])[None, :, :],
        residuals=resid,
        residual_cov=np.eye(3),
        orthogonality=0.0,
        ridge_used=False,
    )
    with pytest.raises(EstimationError):
        gwimm.long_run_covariance(fit)
    # coefficient sum exactly the identity: condition number is nan, still rejected
    fit2 = VarFit(
        coeffs=np.eye(3)[None, :, :],
        residuals=resid,
        residual_cov=np.eye(3),
        orthogonality=0.0,
        ridge_used=False,
    )
    with pytest.raises(EstimationError):
        gwimm.long_run_covariance(fit2)


def test_default_order_values():
    assert gwimm.default_order(8) == 1
    assert gwimm.default_order(27) == 2
    assert gwimm.default_order(300) == 6
    assert gwimm.default_order(1000) == 9
    assert gwimm.default_order(2000) == 12
    assert gwimm.default_order(5_000_000) == 170


def test_aic_order_prefers_the_true_order():
    phi = np.array([[0.6, 0.0, 0.1], [0.1, 0.4, 0.0], [0.0, 0.1, 0.5]])
    series = _simulate_var1(phi, 3000, seed=21)
    order = gwimm.aic_order(series, 8)
    assert 1 <= order <= 3


def test_ratio_param_covariance_orientation():
    triple = (1.7, 2.1, 2.6)
    jac = gwimm.params_from_moments_jacobian(*triple)
    out = gwimm.ratio_param_covariance(np.eye(3), triple)
    assert np.allclose(out, jac.T @ jac, atol=1e-14)
    assert out.shape == (2, 2)


def test_analyze_report_consistency():
    model = gwimm.BranchingModel(gwimm.PoissonReproduction(0.5), gwimm.ProductPoissonImmigration(2))
    y = gwimm.simulate(model, 2002, seed=6).values
    report = gwimm.analyze(y, 2, 2000)
    assert report.order == gwimm.default_order(2000) == 12
    est = gwimm.estimate_by_moments(y, 2, 2000)
    assert report.triple == (est.sample_mean, est.pair_low, est.pair_high)
    assert report.long_run_cov.shape == (3, 3)
    assert report.param_cov_spectral.shape == (2, 2)
    assert report.param_cov_cls.shape == (2, 2)
    assert np.array_equal(report.long_run_cov, report.long_run_cov.T)
    assert np.array_equal(report.param_cov_spectral, report.param_cov_spectral.T)
    assert np.array_equal(report.param_cov_cls, report.param_cov_cls.T)
    assert report.orthogonality < 1e-8
    assert not report.ridge_used
    explicit = gwimm.analyze(y, 2, 2000, order=5)
    assert explicit.order == 5
