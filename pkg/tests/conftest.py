import numpy as np
import pytest

from nscost import channels as chn
from nscost.solver import SolverConfig


@pytest.fixture(scope="session")
def config():
    return SolverConfig()


@pytest.fixture(scope="session")
def swap():
    return chn.swap_channel()


@pytest.fixture(scope="session")
def identity_p2p():
    gamma = np.outer([1, 0, 0, 1], [1, 0, 0, 1]).astype(complex)
    return chn.embed_point_to_point(gamma, 2, 2)


def rand_herm(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (m + m.conj().T) / 2.0
