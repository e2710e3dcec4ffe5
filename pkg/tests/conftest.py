import numpy as np
import pytest

from fbm.fields import build_interior_grid
from fbm.geometry import circle_curve, compute_radii, kite_curve


@pytest.fixture(scope="session")
def kite():
    return kite_curve()


@pytest.fixture(scope="session")
def kite_radii(kite):
    return compute_radii(kite)


@pytest.fixture(scope="session")
def kite_grid(kite, kite_radii):
    return build_interior_grid(kite, kite_radii, 200)


@pytest.fixture(scope="session")
def unit_circle():
    return circle_curve(1.0)


@pytest.fixture(scope="session")
def direction():
    return np.array([0.5, np.sqrt(3.0) / 2.0])
