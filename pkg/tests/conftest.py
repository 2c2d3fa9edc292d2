import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from minpinv.experiments import build_poisson
from minpinv.linalg import svd

FULL_SCALE = os.environ.get("MINPINV_FULL_SCALE", "") == "1"

fullscale = pytest.mark.skipif(
    not FULL_SCALE, reason="manual gate: set MINPINV_FULL_SCALE=1"
)


def pytest_collection_modifyitems(items):
    for item in items:
        if "fullscale" in item.keywords and not FULL_SCALE:
            item.add_marker(
                pytest.mark.skip(reason="manual gate: set MINPINV_FULL_SCALE=1")
            )


@pytest.fixture(scope="session")
def desk_problem():
    return build_poisson(199, 201, 0.1)


@pytest.fixture(scope="session")
def desk_factors(desk_problem):
    return svd(desk_problem.matrix)


@pytest.fixture(scope="session")
def full_problem():
    return build_poisson(1991, 2001, 0.1)


@pytest.fixture(scope="session")
def full_factors(full_problem):
    return svd(full_problem.matrix)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
