"""
Global pytest configuration and fixtures.

This module provides the --skip-slow option and the fixtures shared by
the whole test suite.
"""
import numpy as np
import pytest

from src.analysis.optimizer import OptimizerConfig
from src.states.state_factory import make_state
from src.states.two_qubit import TwoQubitState


# Add a custom option to skip slow oracle tests
def pytest_addoption(parser):
    parser.addoption(
        "--skip-slow",
        action="store_true",
        default=False,
        help="Skip tests marked slow",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--skip-slow"):
        skip_slow = pytest.mark.skip(reason="slow tests skipped with --skip-slow option")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)


@pytest.fixture
def rng():
    """Seeded generator; every test gets the same stream."""
    return np.random.default_rng(1234)


@pytest.fixture
def bell_state():
    return make_state("bell", label="phi+")


@pytest.fixture
def maximally_mixed():
    return TwoQubitState(np.eye(4) / 4.0, label="mixed")


@pytest.fixture
def fast_config():
    """
    Small optimizer configuration for tests.

    Few starts keep the oracle quick; the polish step recovers precision.
    """
    return OptimizerConfig(starts=4, grid_points=9, tol=1e-10, max_iters=100, seed=7)
