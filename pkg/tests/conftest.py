import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from frechet_pd import PersistenceDiagram

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def diagrams(draw, max_points=4):
    """Diagrams on a quarter-integer lattice in [0, 10], so ties actually occur."""
    n = draw(st.integers(0, max_points))
    pts = []
    for _ in range(n):
        b = draw(st.integers(0, 39))
        d = draw(st.integers(b + 1, 40))
        pts.append((b / 4, d / 4))
    return PersistenceDiagram(pts)


@st.composite
def float_diagrams(draw, max_points=4):
    n = draw(st.integers(0, max_points))
    pts = []
    for _ in range(n):
        b = draw(st.floats(0, 9, allow_nan=False))
        p = draw(st.floats(0.01, 5, allow_nan=False))
        pts.append((b, b + p))
    return PersistenceDiagram(pts)


def random_diagram(rng: np.random.Generator, max_points: int = 4, hi: float = 10.0):
    n = int(rng.integers(0, max_points + 1))
    b = rng.uniform(0, hi, n)
    d = rng.uniform(0, hi, n)
    lo, up = np.minimum(b, d), np.maximum(b, d)
    keep = up > lo
    return PersistenceDiagram(np.column_stack([lo[keep], up[keep]]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
