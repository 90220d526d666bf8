import numpy as np
import pytest

from pcmb import modulation, pstbc


@pytest.fixture(scope="session")
def code2():
    return pstbc.generation_matrix(2)


@pytest.fixture(scope="session")
def code4():
    return pstbc.generation_matrix(4)


@pytest.fixture(scope="session")
def qam4():
    return modulation.square_qam(4)


@pytest.fixture(scope="session")
def qam16():
    return modulation.square_qam(16)


@pytest.fixture(scope="session")
def qam64():
    return modulation.square_qam(64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_descending_singulars(rng, d, floor=0.05):
    lam = np.sort(np.abs(rng.standard_normal(d)) + floor)[::-1]
    return np.ascontiguousarray(lam)
