"""Model components: reproduction laws, immigration laws, and the combined process.

The process studied here is an integer-valued AR(1)-type recursion: each step,
every individual reproduces independently according to a fixed offspring law
with mean below one, and an immigration term (possibly serially dependent) is
added on top.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PoissonReproduction",
    "BernoulliReproduction",
    "IidPoissonImmigration",
    "ProductPoissonImmigration",
    "TwoStateMarkovImmigration",
    "BranchingModel",
]


def _check_offspring_mean(mean: float) -> float:
    mean = float(mean)
    if not 0.0 < mean < 1.0:
        raise ValueError(f"offspring mean must lie in (0, 1), got {mean}")
    return mean


@dataclass(frozen=True)
class PoissonReproduction:
    """Poisson offspring counts with mean in (0, 1)."""

    mean: float

    def __post_init__(self):
        object.__setattr__(self, "mean", _check_offspring_mean(self.mean))

    @property
    def variance(self) -> float:
        return self.mean

    kind = "poisson"


@dataclass(frozen=True)
class BernoulliReproduction:
    """Bernoulli offspring counts (each individual leaves 0 or 1 children)."""

    mean: float

    def __post_init__(self):
        object.__setattr__(self, "mean", _check_offspring_mean(self.mean))

    @property
    def variance(self) -> float:
        return self.mean * (1.0 - self.mean)

    kind = "bernoulli"


@dataclass(frozen=True)
class IidPoissonImmigration:
    """Independent Poisson immigration with a fixed rate."""

    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0.0:
            raise ValueError("immigration rate must be positive")

    kind = "iid-poisson"

    @property
    def mean(self) -> float:
        return self.rate

    @property
    def variance(self) -> float:
        return self.rate

    @property
    def dependence_window(self) -> int:
        return 0

    def autocovariance(self, lag: int) -> float:
        """Cov of two immigration draws `lag` steps apart."""
        return self.rate if lag == 0 else 0.0

    def cov_generating_fn(self, x: float) -> float:
        """Power series in x with the lag-(j+1) autocovariances as coefficients."""
        return 0.0

    def cov_geometric_tail(self) -> tuple[int, float, float]:
        """Return (start, coef, ratio) with autocovariance(h) == coef * ratio**h
        holding exactly for every h >= start."""
        return 1, 0.0, 0.0


@dataclass(frozen=True)
class ProductPoissonImmigration:
    """Immigration equal to the product of the last `window` iid Poisson draws.

    With window w, consecutive immigration values share w - 1 of their factors,
    so the series is (w - 1)-dependent: autocovariances vanish at lag >= w.
    """

    window: int
    rate: float = 1.0

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 1:
            raise ValueError("window must be an integer >= 1")
        object.__setattr__(self, "window", int(self.window))
        if not self.rate > 0.0:
            raise ValueError("factor rate must be positive")

    kind = "product"

    @property
    def mean(self) -> float:
        return self.rate**self.window

    @property
    def variance(self) -> float:
        return self.autocovariance(0)

    @property
    def dependence_window(self) -> int:
        return self.window - 1

    def autocovariance(self, lag: int) -> float:
        lag = abs(int(lag))
        if lag >= self.window:
            return 0.0
        # overlapping factors contribute the second moment r + r^2, the rest r each
        second = self.rate + self.rate**2
        shared = self.window - lag
        return second**shared * self.rate ** (2 * lag) - self.rate ** (2 * self.window)

    def cov_generating_fn(self, x: float) -> float:
        return sum(self.autocovariance(j + 1) * x**j for j in range(self.window - 1))

    def cov_geometric_tail(self) -> tuple[int, float, float]:
        return self.window, 0.0, 0.0


@dataclass(frozen=True)
class TwoStateMarkovImmigration:
    """Immigration following a stationary two-state Markov chain on {0, 1}.

    `matrix` is the 2x2 transition matrix, row i giving the distribution of the
    next value when the current value is i.  Autocovariances decay geometrically
    in the chain's second eigenvalue (trace minus one), which may be negative.
    """

    matrix: tuple[tuple[float, float], tuple[float, float]]
    _pi1: float = field(init=False, repr=False)

    def __post_init__(self):
        p = np.asarray(self.matrix, dtype=float)
        if p.shape != (2, 2):
            raise ValueError("transition matrix must be 2x2")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if not np.allclose(p.sum(axis=1), 1.0, atol=1e-12, rtol=0.0):
            raise ValueError("transition matrix rows must sum to 1")
        leave = p[0, 1] + p[1, 0]
        if leave <= 0.0:
            raise ValueError("chain must be able to switch state (matrix is the identity)")
        if p[0, 1] <= 0.0:
            raise ValueError("state 1 must be reachable, otherwise immigration is always 0")
        object.__setattr__(self, "matrix", tuple(tuple(float(v) for v in row) for row in p))
        object.__setattr__(self, "_pi1", p[0, 1] / leave)

    kind = "markov"

    @property
    def stationary(self) -> tuple[float, float]:
        """Stationary distribution over the states (0, 1)."""
        return (1.0 - self._pi1, self._pi1)

    @property
    def second_eigenvalue(self) -> float:
        return self.matrix[0][0] + self.matrix[1][1] - 1.0

    @property
    def mean(self) -> float:
        return self._pi1

    @property
    def variance(self) -> float:
        return self._pi1 * (1.0 - self._pi1)

    @property
    def dependence_window(self) -> int:
        return 0

    def autocovariance(self, lag: int) -> float:
        lag = abs(int(lag))
        rho = self.second_eigenvalue
        if lag == 0:
            return self.variance
        return self.variance * rho**lag

    def cov_generating_fn(self, x: float) -> float:
        rho = self.second_eigenvalue
        # within 1e-9 of the pole the cancellation in 1 - rho*x leaves no
        # correct digits, so treat the whole neighborhood as the pole
        if abs(1.0 - rho * x) < 1e-9:
            raise ValueError("covariance generating function has a pole at x = 1/eigenvalue")
        return self.variance * rho / (1.0 - rho * x)

    def cov_geometric_tail(self) -> tuple[int, float, float]:
        return 0, self.variance, self.second_eigenvalue


@dataclass(frozen=True)
class BranchingModel:
    """A reproduction law paired with an immigration law."""

    reproduction: PoissonReproduction | BernoulliReproduction
    immigration: IidPoissonImmigration | ProductPoissonImmigration | TwoStateMarkovImmigration

    @property
    def offspring_mean(self) -> float:
        return self.reproduction.mean

    @property
    def offspring_variance(self) -> float:
        return self.reproduction.variance

    @property
    def immigration_mean(self) -> float:
        return self.immigration.mean

    @property
    def immigration_variance(self) -> float:
        return self.immigration.variance
