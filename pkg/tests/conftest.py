import numpy as np
import pytest

import gwimm


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile (or load from disk cache) every numba kernel up front so
    timed tests measure the algorithms, not compilation."""
    laws = [
        gwimm.IidPoissonImmigration(1.0),
        gwimm.ProductPoissonImmigration(2),
        gwimm.TwoStateMarkovImmigration(((0.5, 0.5), (1.0, 0.0))),
    ]
    for repro in (gwimm.PoissonReproduction(0.5), gwimm.BernoulliReproduction(0.5)):
        for law in laws:
            model = gwimm.BranchingModel(repro, law)
            gwimm.simulate(model, 32, seed=0)
            gwimm.simulate(model, 32, seed=0, per_individual=True)


@pytest.fixture(scope="session")
def markov_example():
    """The two-state switching immigration used across the packaged studies."""
    return gwimm.TwoStateMarkovImmigration(((0.5, 0.5), (1.0, 0.0)))
