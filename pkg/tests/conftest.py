import numpy as np
import pytest

from flowpressure import get_system


@pytest.fixture(scope="session")
def linear_torus():
    return get_system("linear-torus")


@pytest.fixture(scope="session")
def sine_grid():
    return get_system("sine-grid")


@pytest.fixture(scope="session")
def lorenz():
    return get_system("lorenz")


@pytest.fixture(scope="session")
def cat_suspension():
    return get_system("cat-suspension")


@pytest.fixture
def rng():
    return np.random.default_rng(0)
