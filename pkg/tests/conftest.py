import numpy as np
import pytest

from mobstab.geometry import GridSpec, ReferenceFrame


@pytest.fixture
def small_grid() -> GridSpec:
    """100x100 cells of 28 m anchored at the default window corner."""
    return GridSpec(8.0, 46.5, 100, 100, 28.0)


@pytest.fixture
def unit_frame() -> ReferenceFrame:
    return ReferenceFrame(0.0, 1.0)


@pytest.fixture
def day_frame() -> ReferenceFrame:
    return ReferenceFrame(0.0, 86400.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
