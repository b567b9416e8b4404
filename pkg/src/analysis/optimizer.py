"""
Multi-start coordinate search over periodic angle vectors.

Each start draws random initial angles from its own child of
SeedSequence(seed), then sweeps the coordinates cyclically: a full-period
grid scan picks the best cell and scipy's golden-section search refines it.
Sweeps stop once a full sweep gains less than tol. An optional Nelder-Mead
polish runs from the best point. The best start wins; ties go to the lower
start index, so results depend only on the seed.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from src.utils.errors import ValidationError

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], float]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OptimizerConfig:
    """
    Search parameters shared by every oracle optimizer.

    Attributes:
        starts: Number of independent random starts
        grid_points: Grid size of the per-coordinate scan
        tol: Minimum objective gain per sweep before stopping
        max_iters: Maximum coordinate sweeps per start
        seed: Root seed for all random draws
        xtol: Golden-section bracket tolerance
        polish: Run a Nelder-Mead polish from the best point
        workers: Threads used for the starts (1 runs them inline)
    """

    starts: int = 16
    grid_points: int = 9
    tol: float = 1e-9
    max_iters: int = 200
    seed: int = 0
    xtol: float = 1e-7
    polish: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.starts < 1:
            raise ValidationError(f"starts must be >= 1, got {self.starts}")
        if self.grid_points < 3:
            raise ValidationError(f"grid_points must be >= 3, got {self.grid_points}")
        if not self.tol > 0:
            raise ValidationError(f"tol must be > 0, got {self.tol}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.xtol > 0:
            raise ValidationError(f"xtol must be > 0, got {self.xtol}")
        if self.workers < 1:
            raise ValidationError(f"workers must be >= 1, got {self.workers}")

    def with_seed(self, seed: int) -> "OptimizerConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class OptResult:
    """
    Best point found by an oracle optimizer.

    Attributes:
        value: Objective value at the best point
        settings: Measurement settings realizing the value
        iterations: Coordinate sweeps used by the winning start
        converged: Whether the winning start stopped on the tol criterion
        components: Per-term values at the optimum (I, J or I_1..I_m)
        angles: Raw angle vector of the optimum
    """

    value: float
    settings: Any
    iterations: int
    converged: bool
    components: Tuple[float, ...] = ()
    angles: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.value < 0:
            raise ValidationError(f"optimizer value must be >= 0, got {self.value}")


@dataclass(frozen=True)
class SearchOutcome:
    """Raw result of one start (or of the reduction over starts)."""

    value: float
    x: np.ndarray
    iterations: int
    converged: bool
    start: int = 0


def _refine_coordinate(objective: Objective, x: np.ndarray, k: int, period: float,
                       value: float, cfg: OptimizerConfig) -> Tuple[np.ndarray, float]:
    """Improve coordinate k of x; never returns a worse value."""
    step = period / cfg.grid_points
    # offset 0 is the current point, so the scan cannot lose ground
    grid = x[k] + step * np.arange(cfg.grid_points)
    values = np.empty(cfg.grid_points)
    values[0] = value
    trial = x.copy()
    for i in range(1, cfg.grid_points):
        trial[k] = grid[i]
        values[i] = objective(trial)

    best = int(np.argmax(values))
    best_value = float(values[best])
    best_angle = float(grid[best])

    def negated(angle: float) -> float:
        trial[k] = angle
        return -objective(trial)

    bracket = (best_angle - step, best_angle, best_angle + step)
    try:
        res = minimize_scalar(negated, bracket=bracket, method="golden", options={"xtol": cfg.xtol})
        if -res.fun > best_value:
            best_value = float(-res.fun)
            best_angle = float(res.x)
    except ValueError:
        # flat neighbourhood: the grid point stands
        pass

    if best_value > value:
        x = x.copy()
        x[k] = best_angle
        return x, best_value
    return x, value


def coordinate_search(objective: Objective, x0: Sequence[float], periods: Sequence[float],
                      cfg: OptimizerConfig) -> SearchOutcome:
    """
    Cyclic coordinate ascent from x0.

    Args:
        objective: Function to maximize, periodic in each coordinate
        x0: Initial point
        periods: Period of each coordinate
        cfg: Search configuration

    Returns:
        SearchOutcome for this start
    """
    x = np.array(x0, dtype=np.float64)
    value = float(objective(x))
    converged = False
    sweeps = 0
    for sweeps in range(1, cfg.max_iters + 1):
        before = value
        for k in range(len(x)):
            x, value = _refine_coordinate(objective, x, k, periods[k], value, cfg)
        if value - before < cfg.tol:
            converged = True
            break
    return SearchOutcome(value, x, sweeps, converged)


def _polish(objective: Objective, outcome: SearchOutcome, cfg: OptimizerConfig) -> SearchOutcome:
    res = minimize(lambda v: -objective(v), outcome.x, method="Nelder-Mead",
                   options={"xatol": cfg.xtol, "fatol": cfg.tol, "maxiter": 400 * len(outcome.x)})
    if -res.fun > outcome.value:
        logger.debug("Polish improved %.12g -> %.12g", outcome.value, -res.fun)
        return replace(outcome, value=float(-res.fun), x=np.asarray(res.x, dtype=np.float64))
    return outcome


def multistart(objective: Objective, periods: Sequence[float], cfg: OptimizerConfig,
               label: str = "objective") -> SearchOutcome:
    """
    Maximize a periodic objective from cfg.starts random starts.

    The reduction walks the starts in index order and keeps the first
    strictly better value, so threads do not change the outcome.
    """
    periods = [float(p) for p in periods]
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.starts)

    def run(index: int) -> SearchOutcome:
        rng = np.random.default_rng(children[index])
        x0 = rng.uniform(0.0, 1.0, size=len(periods)) * np.asarray(periods)
        outcome = coordinate_search(objective, x0, periods, cfg)
        logger.debug("%s start %d: %.12g after %d sweeps (converged=%s)",
                     label, index, outcome.value, outcome.iterations, outcome.converged)
        return replace(outcome, start=index)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes: List[SearchOutcome] = list(pool.map(run, range(cfg.starts)))
    else:
        outcomes = [run(i) for i in range(cfg.starts)]

    best: Optional[SearchOutcome] = None
    for outcome in outcomes:
        if best is None or outcome.value > best.value:
            best = outcome

    if cfg.polish:
        best = _polish(objective, best, cfg)
    if not best.converged:
        logger.warning("%s: best start %d did not converge within %d sweeps",
                       label, best.start, cfg.max_iters)
    logger.info("%s: best value %.12g from start %d of %d", label, best.value, best.start, cfg.starts)
    return best
