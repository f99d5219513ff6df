import numpy as np
import pytest
from hypothesis import settings

from peridyn_rk.grid import build_grid, unit_square
from peridyn_rk.kernel import RadialKernel
from peridyn_rk.nlops import Material

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: runs for more than a few seconds")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def material():
    return Material.from_engineering(1.0, 0.4)


@pytest.fixture
def unit_kernel():
    return RadialKernel.inverse_distance(1.0)


@pytest.fixture
def aniso_grid():
    return build_grid(unit_square(), 1 / 8, (1.0, 0.5), 0.25)
