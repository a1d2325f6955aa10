import numpy as np
import pytest

from plab.grid import Grid
from plab.partition import build_partition


@pytest.fixture(scope="session")
def pu():
    return build_partition()


@pytest.fixture(scope="session")
def grid16():
    return Grid(16, 2.0 * np.pi, 3)


@pytest.fixture(scope="session")
def grid32():
    return Grid(32, 2.0 * np.pi, 3)


@pytest.fixture(scope="session")
def grid64():
    return Grid(64, 2.0 * np.pi, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
