import numpy as np
import pytest

from pairnet.activation import LINEAR
from pairnet.model import LocalPairNet
from pairnet.partition import Interval


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def make_local():
    """Factory for random but valid LocalPairNet instances."""

    def make(n=2, seed=0, subspace=None, activation=LINEAR, fallback_mean=None, scale=1.0):
        gen = np.random.default_rng(seed)
        if subspace is None:
            subspace = tuple(Interval(float(i), float(i + 2)) for i in range(n))
        return LocalPairNet(
            n=n,
            alphas=gen.dirichlet(np.ones(n)),
            c=scale * gen.normal(size=2**n),
            gamma=scale * gen.normal(size=2**n),
            subspace=tuple(subspace),
            activation=activation,
            fallback_mean=fallback_mean,
        )

    return make


def sample_box(box, n_points, seed):
    """Uniform points inside a tuple-of-Intervals box, shape (N, len(box))."""
    gen = np.random.default_rng(seed)
    cols = [gen.uniform(iv.lo, iv.hi, size=n_points) for iv in box]
    return np.column_stack(cols)
