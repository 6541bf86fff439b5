import numpy as np
import pytest
from hypothesis import settings

from lvswitch.presets import bottom_pair, identical_pair, top_pair

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def top():
    return top_pair(5.5)


@pytest.fixture
def bottom():
    return bottom_pair(6.8)


@pytest.fixture
def bottom_overlap():
    return bottom_pair(6.2)


@pytest.fixture
def identical():
    return identical_pair()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
