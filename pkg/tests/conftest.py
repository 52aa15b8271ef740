import numpy as np
import pytest

from beltflow import DensityField, Grid, MollifierSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def small_grid():
    return Grid(nx=16, ny=16, dx=0.01, dy=0.01)


@pytest.fixture
def spec():
    return MollifierSpec(sigma=10_000.0)


def compact_random_field(grid, rng, amplitude=1.0, margin=4):
    """Random non-negative field vanishing within ``margin`` cells of the walls."""
    values = np.zeros((grid.nx, grid.ny))
    core = rng.random((grid.nx - 2 * margin, grid.ny - 2 * margin)) * amplitude
    values[margin:-margin, margin:-margin] = core
    return DensityField(grid, values, time=0.0)


@pytest.fixture
def random_field(small_grid, rng):
    return compact_random_field(small_grid, rng)
