from pathlib import Path

import numpy as np
import pytest

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid1d():
    from hpchem import make_grid

    return make_grid(1, 64, 2.0 * np.pi)


@pytest.fixture
def grid2d():
    from hpchem import make_grid

    return make_grid(2, 16, 5.0)
