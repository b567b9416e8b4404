"""
Tests for the multi-start coordinate search.
"""
import numpy as np
import pytest

from src.analysis.optimizer import (
    TWO_PI, OptimizerConfig, OptResult, coordinate_search, multistart,
)
from src.utils.errors import ValidationError


def separable(x):
    return float(np.cos(x[0] - 1.0) + np.cos(x[1] + 2.0))


def coupled(x):
    return float(np.cos(x[0] - x[1]) + 0.5 * np.cos(x[1] - 0.3) + 0.25 * np.sin(x[2] + x[0]))


@pytest.mark.parametrize("field,value", [
    ("starts", 0), ("grid_points", 2), ("tol", 0.0), ("max_iters", 0), ("xtol", -1.0), ("workers", 0),
])
def test_config_validation(field, value):
    with pytest.raises(ValidationError):
        OptimizerConfig(**{field: value})


def test_config_defaults_and_seed():
    cfg = OptimizerConfig()
    assert (cfg.starts, cfg.grid_points, cfg.tol, cfg.max_iters, cfg.seed) == (16, 9, 1e-9, 200, 0)
    assert cfg.with_seed(5).seed == 5
    assert cfg.with_seed(5).starts == 16


def test_opt_result_rejects_negative_value():
    with pytest.raises(ValidationError):
        OptResult(-1.0, None, 1, True)


def test_coordinate_search_separable():
    """Test that one sweep finds the maximum of a separable objective."""
    cfg = OptimizerConfig(polish=False)
    outcome = coordinate_search(separable, [3.0, 3.0], [TWO_PI, TWO_PI], cfg)
    assert outcome.value == pytest.approx(2.0, abs=1e-10)
    assert outcome.converged
    assert np.cos(outcome.x[0] - 1.0) == pytest.approx(1.0, abs=1e-10)


def test_coordinate_search_never_decreases():
    cfg = OptimizerConfig(max_iters=1, polish=False)
    start = np.array([0.2, -1.0, 2.5])
    outcome = coordinate_search(coupled, start, [TWO_PI] * 3, cfg)
    assert outcome.value >= coupled(start)
    assert outcome.iterations == 1


def test_flat_objective_converges():
    cfg = OptimizerConfig(starts=2, polish=True)
    outcome = multistart(lambda x: 0.0, [TWO_PI] * 2, cfg)
    assert outcome.value == 0.0
    assert outcome.converged
    assert outcome.iterations == 1


def test_multistart_finds_coupled_maximum():
    cfg = OptimizerConfig(starts=4, seed=3)
    outcome = multistart(coupled, [TWO_PI] * 3, cfg)
    assert outcome.value == pytest.approx(1.75, abs=1e-7)


def test_multistart_is_deterministic():
    """Test that the same seed gives the same result, with or without threads."""
    cfg = OptimizerConfig(starts=5, seed=11, polish=False)
    first = multistart(coupled, [TWO_PI] * 3, cfg)
    second = multistart(coupled, [TWO_PI] * 3, cfg)
    threaded = multistart(coupled, [TWO_PI] * 3, OptimizerConfig(starts=5, seed=11, polish=False, workers=3))
    assert first.value == second.value
    assert np.array_equal(first.x, second.x)
    assert threaded.value == first.value
    assert threaded.start == first.start
