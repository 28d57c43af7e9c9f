import numpy as np
import pytest

from respectra.contour import ContourSpec, build_contour, real_axis_grid
from respectra.model import make_model


@pytest.fixture(scope="session")
def default_spec():
    return ContourSpec(depth=0.5, cutoff=20.0, shape="rectangle", n_nodes=200)


@pytest.fixture(scope="session")
def default_grid(default_spec):
    return build_contour(default_spec)


@pytest.fixture(scope="session")
def default_model(default_spec):
    # sqrt(z) exp(-z/2) coupling, level at 1, coupling 0.1
    return make_model("sqrt_exp", [1.0], 1.0, 0.1, default_spec)


@pytest.fixture(scope="session")
def axis_grid():
    return real_axis_grid(20.0, 400)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
