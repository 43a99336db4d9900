import numpy as np
import pytest

from dunkl_czo_lab.geometry import preset, z2n
from dunkl_czo_lab.lab import make_lab


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical checks")


@pytest.fixture(scope="session")
def lab1():
    return make_lab(z2n(1, 1.0))


@pytest.fixture(scope="session")
def lab2():
    return make_lab(z2n(2, [1.0, 0.5]))


@pytest.fixture(scope="session")
def lab_b2():
    return make_lab(preset("b2"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
