"""One-dimensional maximization: coarse scan, then golden-section refinement."""

import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from app.errors import NoMaximum
from app.models.config import settings

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1 / phi
INV_PHI_SQUARE = (3.0 - math.sqrt(5.0)) / 2.0  # 1 / phi^2

Objective = Callable[[float], float]


def _finite(value: float) -> float:
    return value if math.isfinite(value) else -math.inf


def golden_section_max(
    f: Objective, lo: float, hi: float, rtol: Optional[float] = None
) -> Tuple[float, float]:
    """Maximize ``f`` on [lo, hi], assumed unimodal there.

    Stops once the bracket is narrower than ``rtol`` times the larger endpoint
    magnitude (or ``rtol`` itself when both endpoints are zero).

    Returns:
        The maximizer and the objective value there.
    """
    rtol = settings.golden_rtol if rtol is None else rtol
    a, b = min(lo, hi), max(lo, hi)
    tol = rtol * max(abs(a), abs(b)) or rtol
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, _finite(f(x))

    steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc, yd = _finite(f(c)), _finite(f(d))

    for _ in range(steps - 1):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI_SQUARE * h
            yc = _finite(f(c))
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = _finite(f(d))

    logger.debug("Golden section converged on [{:.9g}, {:.9g}] after {} steps", a, b, steps)
    return (c, yc) if yc > yd else (d, yd)


def scan_then_refine(
    f: Objective,
    grid: Sequence[float],
    values: Optional[Sequence[float]] = None,
    rtol: Optional[float] = None,
) -> Tuple[float, float]:
    """Grid argmax, refined by golden section between the neighbouring grid points.

    ``values`` may carry precomputed objective values on ``grid``. Non-finite
    values count as minus infinity. The better of the grid best and the refined
    point is returned.

    Raises:
        NoMaximum: If the objective is flat to ``settings.flat_tol`` on the grid.
    """
    grid = np.asarray(grid, dtype=float)
    if values is None:
        values = [f(float(x)) for x in grid]
    scores = np.array([_finite(float(v)) for v in values])

    finite = scores[np.isfinite(scores)]
    if finite.size == 0:
        raise NoMaximum("objective is undefined on the whole grid")
    best = int(np.argmax(scores))
    spread = float(finite.max() - finite.min())
    if spread <= settings.flat_tol * max(1.0, abs(float(finite.max()))):
        raise NoMaximum(f"objective is flat to {settings.flat_tol:g} on the grid")

    left = grid[max(best - 1, 0)]
    right = grid[min(best + 1, grid.size - 1)]
    x, fx = golden_section_max(f, left, right, rtol)
    if fx >= scores[best]:
        return x, fx
    return float(grid[best]), float(scores[best])


def brute_force_argmax(
    f: Objective, lo: float, hi: float, points: int = 10_000
) -> Tuple[float, float, float]:
    """Dense-grid argmax; returns (maximizer, value, grid cell width)."""
    grid = np.linspace(lo, hi, points)
    scores = np.array([_finite(f(float(x))) for x in grid])
    best = int(np.argmax(scores))
    return float(grid[best]), float(scores[best]), float(grid[1] - grid[0])
