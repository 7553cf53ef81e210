import os

import numpy as np
import pytest

from quenchlab.finite_chain import FiniteChain, symmetric_two_state
from quenchlab.intermittent import alpha_coeffs_ulam, ulam_build


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run optional slow checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow") or os.environ.get("QUENCHLAB_SLOW"):
        return
    skip = pytest.mark.skip(reason="optional slow check; use --runslow or QUENCHLAB_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def two_state():
    return symmetric_two_state()


@pytest.fixture(scope="session")
def iid_rademacher():
    return FiniteChain([[0.5, 0.5], [0.5, 0.5]], [1.0, -1.0])


@pytest.fixture(scope="session")
def mds_chain():
    # P f = 0 with f = (1, -1, 0): rows put equal weight on states 0 and 1
    return FiniteChain([[0.25, 0.25, 0.5], [0.4, 0.4, 0.2], [0.1, 0.1, 0.8]], [1.0, -1.0, 0.0])


@pytest.fixture(scope="session")
def ulam_model():
    return ulam_build(0.25, 8192, 2.0)


@pytest.fixture(scope="session")
def ulam_alpha(ulam_model):
    return alpha_coeffs_ulam(ulam_model, 64)


@pytest.fixture(scope="session")
def ulam_small():
    return ulam_build(0.25, 1024, 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
