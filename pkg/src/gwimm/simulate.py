"""Trajectory simulation.

Exact sampling of the branching recursion with either aggregated offspring
draws (a Poisson sum of Poissons is Poisson, a sum of Bernoullis is binomial)
or literal per-individual draws.  The serial recursion is compiled with numba
so multi-million-step trajectories take fractions of a second.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from numba import njit

from .models import (
    BranchingModel,
    IidPoissonImmigration,
    ProductPoissonImmigration,
    TwoStateMarkovImmigration,
)

__all__ = [
    "Trajectory",
    "simulate",
    "sample_reproduction_sum",
    "sample_immigration",
    "replication_seed",
    "burn_in_length",
]

# stationarity is approached geometrically at rate offspring_mean; run the
# chain from 0 until the residual influence of the start is below this
_BURN_IN_TOL = 1e-12


def burn_in_length(model: BranchingModel) -> int:
    lam = model.offspring_mean
    base = int(math.ceil(math.log(_BURN_IN_TOL) / math.log(lam)))
    return base + model.immigration.dependence_window


def replication_seed(master_seed: int, index: int) -> int:
    """Derive the seed for replication `index` of a study seeded by `master_seed`."""
    ss = np.random.SeedSequence((int(master_seed), int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class Trajectory:
    """A simulated stationary stretch of the process."""

    values: np.ndarray
    model: BranchingModel
    seed: int
    burn_in: int

    def __len__(self) -> int:
        return self.values.shape[0]


@njit(cache=True)
def _poisson_chain(eps, lam, seed):
    np.random.seed(seed)
    out = np.empty(eps.shape[0], dtype=np.int64)
    y = 0
    for t in range(eps.shape[0]):
        if y > 0:
            y = np.random.poisson(lam * y) + eps[t]
        else:
            y = eps[t]
        out[t] = y
    return out


@njit(cache=True)
def _bernoulli_chain(eps, lam, seed):
    np.random.seed(seed)
    out = np.empty(eps.shape[0], dtype=np.int64)
    y = 0
    for t in range(eps.shape[0]):
        if y > 0:
            y = np.random.binomial(y, lam) + eps[t]
        else:
            y = eps[t]
        out[t] = y
    return out


@njit(cache=True)
def _poisson_chain_individual(eps, lam, seed):
    np.random.seed(seed)
    out = np.empty(eps.shape[0], dtype=np.int64)
    y = 0
    for t in range(eps.shape[0]):
        total = 0
        for _ in range(y):
            total += np.random.poisson(lam)
        y = total + eps[t]
        out[t] = y
    return out


@njit(cache=True)
def _bernoulli_chain_individual(eps, lam, seed):
    np.random.seed(seed)
    out = np.empty(eps.shape[0], dtype=np.int64)
    y = 0
    for t in range(eps.shape[0]):
        total = 0
        for _ in range(y):
            if np.random.random() < lam:
                total += 1
        y = total + eps[t]
        out[t] = y
    return out


@njit(cache=True)
def _markov_path(length, p01, p11, pi1, seed):
    np.random.seed(seed)
    out = np.empty(length, dtype=np.int64)
    state = 1 if np.random.random() < pi1 else 0
    out[0] = state
    for t in range(1, length):
        p = p11 if state == 1 else p01
        state = 1 if np.random.random() < p else 0
        out[t] = state
    return out


def _product_path(rng: np.random.Generator, law: ProductPoissonImmigration, length: int) -> np.ndarray:
    w = law.window
    z = rng.poisson(law.rate, size=length + w - 1).astype(np.int64)
    eps = z[w - 1 :].copy()
    for i in range(1, w):
        eps *= z[w - 1 - i : length + w - 1 - i]
    return eps


def _immigration_path(model: BranchingModel, length: int, ss: np.random.SeedSequence) -> np.ndarray:
    law = model.immigration
    if isinstance(law, IidPoissonImmigration):
        rng = np.random.Generator(np.random.PCG64(ss))
        return rng.poisson(law.rate, size=length).astype(np.int64)
    if isinstance(law, ProductPoissonImmigration):
        rng = np.random.Generator(np.random.PCG64(ss))
        return _product_path(rng, law, length)
    if isinstance(law, TwoStateMarkovImmigration):
        seed32 = int(ss.generate_state(1, dtype=np.uint32)[0])
        p = law.matrix
        return _markov_path(length, p[0][1], p[1][1], law.stationary[1], seed32)
    raise TypeError(f"unknown immigration law {law!r}")


def simulate(
    model: BranchingModel,
    length: int,
    seed: int,
    per_individual: bool = False,
) -> Trajectory:
    """Simulate `length` stationary steps of the process.

    The chain starts empty, the immigration path starts in its own stationary
    regime, and a burn-in long enough for the start to be numerically
    irrelevant is discarded.  Identical (model, length, seed, per_individual)
    inputs reproduce the identical trajectory.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    burn = burn_in_length(model)
    total = burn + int(length)

    ss = np.random.SeedSequence(int(seed))
    ss_imm, ss_chain = ss.spawn(2)
    eps = _immigration_path(model, total, ss_imm)
    chain_seed = int(ss_chain.generate_state(1, dtype=np.uint32)[0])

    lam = model.offspring_mean
    kind = model.reproduction.kind
    if kind == "poisson":
        kernel = _poisson_chain_individual if per_individual else _poisson_chain
    elif kind == "bernoulli":
        kernel = _bernoulli_chain_individual if per_individual else _bernoulli_chain
    else:  # pragma: no cover - laws are closed over two kinds
        raise TypeError(f"unknown reproduction law {model.reproduction!r}")
    path = kernel(eps, lam, chain_seed)
    return Trajectory(values=path[burn:], model=model, seed=int(seed), burn_in=burn)


def sample_reproduction_sum(law, count: int, rng: np.random.Generator) -> int:
    """Draw the total offspring of `count` independent individuals in one shot."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if law.kind == "poisson":
        return int(rng.poisson(law.mean * count))
    if law.kind == "bernoulli":
        return int(rng.binomial(count, law.mean))
    raise TypeError(f"unknown reproduction law {law!r}")


def sample_immigration(law, length: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a stationary immigration path of the given length."""
    if length < 1:
        raise ValueError("length must be >= 1")
    if isinstance(law, IidPoissonImmigration):
        return rng.poisson(law.rate, size=length).astype(np.int64)
    if isinstance(law, ProductPoissonImmigration):
        return _product_path(rng, law, length)
    if isinstance(law, TwoStateMarkovImmigration):
        p = law.matrix
        u = rng.random(length)
        out = np.empty(length, dtype=np.int64)
        state = 1 if u[0] < law.stationary[1] else 0
        out[0] = state
        for t in range(1, length):
            p_next = p[state][1]
            state = 1 if u[t] < p_next else 0
            out[t] = state
        return out
    raise TypeError(f"unknown immigration law {law!r}")
