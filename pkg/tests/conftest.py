import numpy as np
import pytest

from rdch import Field, Grid


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def unit_grid():
    return Grid.interval(1.0, 128)


@pytest.fixture
def square_grid():
    return Grid.rectangle((1.0, 1.0), (16, 16))


def cosine_field(grid: Grid, baseline: float = 0.5, amplitude: float = 0.3,
                 frequency: int = 1) -> Field:
    if grid.dim == 1:
        x = grid.centers(0)
        vals = baseline + amplitude * np.cos(frequency * np.pi * x / grid.extents[0])
    else:
        X, Y = grid.meshgrid()
        vals = baseline + amplitude * (np.cos(frequency * np.pi * X / grid.extents[0])
                                       * np.cos(frequency * np.pi * Y / grid.extents[1]))
    return Field(grid, vals)


def random_field(grid: Grid, rng, lo: float = -1.0, hi: float = 1.0) -> Field:
    return Field(grid, rng.uniform(lo, hi, size=grid.shape))
