import pytest

from field import Grid, gaussian
from gevrey import GevreySequence
from ucpu import build_lattice_ucpu
from verification import gauss9


@pytest.fixture
def grid():
    return Grid(L=16.0, delta=1.0 / 16.0)


@pytest.fixture
def seq():
    return GevreySequence(sigma=1.0)


@pytest.fixture(scope="session")
def stock_ucpu():
    return build_lattice_ucpu(1.0, 1.0, 12.0, Grid())


@pytest.fixture
def family9(grid):
    return gauss9(grid)


@pytest.fixture
def g(grid):
    return gaussian(grid)
