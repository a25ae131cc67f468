import numpy as np
import pytest

import gwimm
from gwimm.errors import DegenerateMomentsError, EstimationError


def test_pair_average_hand_values():
    y = np.array([1, 2, 3, 4, 5])
    assert gwimm.pair_average(y, 0, 3) == pytest.approx((1 + 4 + 9) / 3)
    assert gwimm.pair_average(y, 2, 3) == pytest.approx((3 + 8 + 15) / 3)
    assert gwimm.pair_average(y, 4, 1) == pytest.approx(5.0)


def test_pair_average_validation():
    y = np.arange(10)
    with pytest.raises(ValueError):
        gwimm.pair_average(y, 3, 8)  # needs 11 values
    with pytest.raises(ValueError):
        gwimm.pair_average(y, -1, 3)
    with pytest.raises(ValueError):
        gwimm.pair_average(y, 1, 0)


def test_params_from_moments_inverts_the_exact_moments():
    # for the product-factor law the pair-average ratio at the window lag is
    # exact, so the map recovers the true parameters from oracle moments
    for lam, window in [(0.5, 2), (0.8, 3)]:
        model = gwimm.BranchingModel(
            gwimm.PoissonReproduction(lam), gwimm.ProductPoissonImmigration(window)
        )
        a = gwimm.stationary_mean(model)
        b = gwimm.product_moment(model, window - 1)
        c = gwimm.product_moment(model, window)
        r, m = gwimm.params_from_moments(a, b, c)
        assert r == pytest.approx(lam, abs=1e-12)
        assert m == pytest.approx(model.immigration_mean, abs=1e-12)


def test_params_from_moments_near_inverts_for_geometric_covariances():
    model = gwimm.BranchingModel(
        gwimm.PoissonReproduction(0.7),
        gwimm.TwoStateMarkovImmigration(((0.5, 0.5), (1.0, 0.0))),
    )
    k = 30
    a = gwimm.stationary_mean(model)
    b = gwimm.product_moment(model, k - 1)
    c = gwimm.product_moment(model, k)
    r, m = gwimm.params_from_moments(a, b, c)
    assert r == pytest.approx(0.7, abs=1e-3)
    assert m == pytest.approx(model.immigration_mean, abs=1e-3)


def test_degenerate_denominator():
    with pytest.raises(DegenerateMomentsError):
        gwimm.params_from_moments(2.0, 4.0, 3.0)
    with pytest.raises(DegenerateMomentsError):
        gwimm.params_from_moments_jacobian(2.0, 4.0, 3.0)
    with pytest.raises(DegenerateMomentsError):
        gwimm.estimate_by_moments(np.full(100, 7), 2, 90)


def test_jacobian_matches_finite_differences_spot():
    point = (1.7, 2.1, 2.6)
    jac = gwimm.params_from_moments_jacobian(*point)
    assert jac.shape == (3, 2)
    h = 1e-6
    for i in range(3):
        lo = list(point)
        hi = list(point)
        lo[i] -= h
        hi[i] += h
        f_lo = np.array(gwimm.params_from_moments(*lo))
        f_hi = np.array(gwimm.params_from_moments(*hi))
        fd = (f_hi - f_lo) / (2 * h)
        assert np.allclose(jac[i], fd, rtol=1e-6, atol=1e-9)


def test_estimate_matches_the_moment_map_bit_for_bit():
    model = gwimm.BranchingModel(gwimm.PoissonReproduction(0.5), gwimm.ProductPoissonImmigration(2))
    y = gwimm.simulate(model, 2002, seed=3).values
    est = gwimm.estimate_by_moments(y, 2, 2000)
    r, m = gwimm.params_from_moments(est.sample_mean, est.pair_low, est.pair_high)
    assert est.offspring_mean == r
    assert est.immigration_mean == m
    assert est.lag == 2 and est.n == 2000


def test_estimate_consistency_on_a_long_trajectory():
    model = gwimm.BranchingModel(gwimm.PoissonReproduction(0.5), gwimm.ProductPoissonImmigration(2))
    y = gwimm.simulate(model, 300_002, seed=8).values
    est = gwimm.estimate_by_moments(y, 2, 300_000)
    assert est.offspring_mean == pytest.approx(0.5, abs=0.01)
    assert est.immigration_mean == pytest.approx(1.0, abs=0.02)


def test_estimate_is_not_clamped():
    # an alternating sequence drives the ratio negative; it must be returned as is
    y = np.tile([0, 3], 8)
    est = gwimm.estimate_by_moments(y, 1, 14)
    assert est.offspring_mean < 0.0
    assert est.immigration_mean == pytest.approx(
        est.sample_mean * (1.0 - est.offspring_mean)
    )


def test_estimate_lag_validation():
    y = np.arange(30)
    with pytest.raises(ValueError):
        gwimm.estimate_by_moments(y, 0, 10)


def test_cls_covariance_shape_and_symmetry():
    model = gwimm.BranchingModel(gwimm.PoissonReproduction(0.5), gwimm.ProductPoissonImmigration(2))
    y = gwimm.simulate(model, 2001, seed=4).values
    est = gwimm.estimate_by_moments(y, 2, 1999)
    omega = gwimm.cls_param_covariance(y, 1999, est.offspring_mean, est.immigration_mean)
    assert omega.shape == (2, 2)
    assert np.array_equal(omega, omega.T)
    assert np.all(np.linalg.eigvalsh(omega) > -1e-10)


def test_cls_covariance_validation():
    y = np.arange(10, dtype=float)
    with pytest.raises(ValueError):
        gwimm.cls_param_covariance(y, 10, 0.5, 1.0)  # needs n + 1 values
    with pytest.raises(EstimationError):
        gwimm.cls_param_covariance(np.full(50, 2.0), 49, 0.5, 1.0)  # singular design
