import numpy as np
import pytest

from blbayes import demo


def random_spd(rng, n, jitter=0.1):
    """Well-conditioned random SPD matrix."""
    a = rng.normal(size=(n, n))
    return a @ a.T + jitter * n * np.eye(n)


def random_symmetric(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) * scale
    return 0.5 * (a + a.T)


@pytest.fixture(scope="session")
def demo_panel():
    return demo.demo_return_panel()


@pytest.fixture(scope="session")
def demo_views_factory():
    return demo.demo_views
