import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from setflow.body2d import from_polygon
from setflow.lab import random_body

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**31 - 1)
angles = st.floats(min_value=-2 * np.pi, max_value=2 * np.pi, allow_nan=False)
roughness = st.floats(min_value=0.0, max_value=0.1)


@st.composite
def bodies(draw, max_roughness=0.1):
    return random_body(draw(seeds), roughness=draw(st.floats(0.0, max_roughness)))


@pytest.fixture
def square():
    return from_polygon([[0, 0], [1, 0], [1, 1], [0, 1]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
