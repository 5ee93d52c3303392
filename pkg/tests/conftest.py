import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_symmetric(rng, dim, scale=1.0):
    g = rng.standard_normal((dim, dim))
    return scale * (g + g.T) / 2.0
