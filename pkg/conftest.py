import hypothesis
import numpy as np
import pytest

from pathSystems.pathspace import TimeGrid

np.seterr(all="warn")

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid():
    """h = 1/16 up to t = 3."""
    return TimeGrid(1 / 16, 48)


@pytest.fixture
def fine_grid():
    """h = 1/64 up to t = 3."""
    return TimeGrid(1 / 64, 192)
