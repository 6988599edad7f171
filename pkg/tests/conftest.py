import numpy as np
import pytest

from fracqm import PositionWavefunction, make_grid, normalize


@pytest.fixture
def grid():
    return make_grid(256, -16.0, 16.0)


def random_states(grid, count, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        raw = rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points)
        out.append(normalize(PositionWavefunction(grid=grid, samples=raw)))
    return out
