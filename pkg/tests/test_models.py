import numpy as np
import pytest

from gwimm import (
    BernoulliReproduction,
    BranchingModel,
    IidPoissonImmigration,
    PoissonReproduction,
    ProductPoissonImmigration,
    TwoStateMarkovImmigration,
)


@pytest.mark.parametrize("bad", [0.0, 1.0, 1.2, -0.1])
@pytest.mark.parametrize("cls", [PoissonReproduction, BernoulliReproduction])
def test_offspring_mean_must_be_strictly_subcritical(cls, bad):
    with pytest.raises(ValueError):
        cls(bad)


def test_reproduction_variances():
    assert PoissonReproduction(0.7).variance == 0.7
    assert BernoulliReproduction(0.7).variance == pytest.approx(0.21)


def test_iid_poisson_law():
    law = IidPoissonImmigration(1.5)
    assert law.mean == 1.5
    assert law.variance == 1.5
    assert law.autocovariance(0) == 1.5
    assert law.autocovariance(3) == 0.0
    assert law.cov_generating_fn(0.4) == 0.0
    assert law.cov_geometric_tail() == (1, 0.0, 0.0)
    assert law.dependence_window == 0
    with pytest.raises(ValueError):
        IidPoissonImmigration(0.0)


def test_product_law_window_two_unit_rate():
    # eps_n = Z_n * Z_{n-1}, Z iid Poisson(1): E eps = 1,
    # E(eps_0 eps_1) = E(Z^2) E(Z) E(Z) = 2, E(eps_0^2) = E(Z^2)^2 = 4
    law = ProductPoissonImmigration(2)
    assert law.mean == 1.0
    assert law.autocovariance(0) == 3.0
    assert law.autocovariance(1) == 1.0
    assert law.autocovariance(2) == 0.0
    assert law.dependence_window == 1
    assert law.cov_geometric_tail() == (2, 0.0, 0.0)
    # generating function is the constant nu_1
    assert law.cov_generating_fn(0.3) == 1.0
    assert law.cov_generating_fn(10.0) == 1.0


def test_product_law_general_rate_matches_direct_moment_computation():
    r = 0.6
    law = ProductPoissonImmigration(3, rate=r)
    assert law.mean == pytest.approx(r**3)
    second = r + r**2
    for h in range(5):
        shared = max(3 - h, 0)
        if h < 3:
            expected = second**shared * r ** (2 * h) - r**6
        else:
            expected = 0.0
        assert law.autocovariance(h) == pytest.approx(expected, abs=1e-15)
    # polynomial generating function evaluated anywhere, including > 1
    x = 2.5
    assert law.cov_generating_fn(x) == pytest.approx(
        law.autocovariance(1) + law.autocovariance(2) * x
    )


@pytest.mark.parametrize("bad", [0, -1, 1.5])
def test_product_window_validation(bad):
    with pytest.raises(ValueError):
        ProductPoissonImmigration(bad)


def test_markov_law_stationary_and_eigenvalue(markov_example):
    law = markov_example
    assert law.stationary == pytest.approx((2.0 / 3.0, 1.0 / 3.0))
    assert law.second_eigenvalue == pytest.approx(-0.5)
    assert law.mean == pytest.approx(1.0 / 3.0)
    assert law.variance == pytest.approx(2.0 / 9.0)


def test_markov_autocovariance_against_matrix_powers(markov_example):
    # independent route: nu_h = sum_ij i*j*pi_i*(P^h)_ij - mean^2
    law = markov_example
    p = np.array(law.matrix)
    pi = np.array(law.stationary)
    for h in range(7):
        ph = np.linalg.matrix_power(p, h)
        second = pi[1] * ph[1, 1]  # only the (1,1) term survives i*j
        assert law.autocovariance(h) == pytest.approx(second - law.mean**2, abs=1e-14)


def test_markov_generating_fn_matches_series(markov_example):
    law = markov_example
    x = 0.3
    brute = sum(law.autocovariance(j + 1) * x**j for j in range(200))
    assert law.cov_generating_fn(x) == pytest.approx(brute, rel=1e-13)
    with pytest.raises(ValueError):
        law.cov_generating_fn(1.0 / law.second_eigenvalue)


def test_markov_validation():
    with pytest.raises(ValueError):
        TwoStateMarkovImmigration(((0.5, 0.5),))  # wrong shape
    with pytest.raises(ValueError):
        TwoStateMarkovImmigration(((0.9, 0.2), (1.0, 0.0)))  # rows must sum to 1
    with pytest.raises(ValueError):
        TwoStateMarkovImmigration(((1.2, -0.2), (1.0, 0.0)))  # entries in [0, 1]
    with pytest.raises(ValueError):
        TwoStateMarkovImmigration(((1.0, 0.0), (0.0, 1.0)))  # cannot switch
    with pytest.raises(ValueError):
        TwoStateMarkovImmigration(((1.0, 0.0), (1.0, 0.0)))  # state 1 unreachable


def test_geometric_tail_contract_holds_exactly():
    laws = [
        IidPoissonImmigration(2.0),
        ProductPoissonImmigration(3, rate=0.8),
        TwoStateMarkovImmigration(((0.7, 0.3), (0.4, 0.6))),
    ]
    for law in laws:
        start, coef, ratio = law.cov_geometric_tail()
        for h in range(start, start + 6):
            assert law.autocovariance(h) == pytest.approx(coef * ratio**h, abs=1e-15)


def test_branching_model_passthrough(markov_example):
    model = BranchingModel(BernoulliReproduction(0.4), markov_example)
    assert model.offspring_mean == 0.4
    assert model.offspring_variance == pytest.approx(0.24)
    assert model.immigration_mean == pytest.approx(1.0 / 3.0)
    assert model.immigration_variance == pytest.approx(2.0 / 9.0)
