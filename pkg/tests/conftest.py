import numpy as np
import pytest

from probgsp.opspace import discrete_space


def random_symmetric(rng, n):
    A = rng.standard_normal((n, n))
    return (A + A.T) / 2


def random_laplacian(rng, n, p=0.5):
    W = np.triu(rng.uniform(0.2, 1.5, size=(n, n)) * (rng.uniform(size=(n, n)) < p), 1)
    W = W + W.T
    return np.diag(W.sum(1)) - W


def random_space(rng, n, m):
    w = rng.uniform(0.1, 1.0, size=m)
    return discrete_space([random_symmetric(rng, n) for _ in range(m)], w / w.sum())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
