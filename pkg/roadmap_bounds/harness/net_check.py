"""
Net Check
Conservative grid certificate that a sample set is an alpha-net of the free space.
"""

import math
from typing import Optional

import numpy as np
from loguru import logger

from config import settings
from roadmap_bounds.geometry.environment import Environment, PointLike, as_points
from roadmap_bounds.prm.spatial_index import GridIndex


def free_space_grid(env: Environment, pitch: float) -> np.ndarray:
    """
    Grid points covering every box, spacing at most pitch on each axis.

    Each box gets its own grid anchored at lo with both faces included, so any
    point of the box is within pitch * sqrt(d) / 2 of a grid point.
    """
    if not pitch > 0.0:
        raise ValueError(f"Grid pitch must be positive, got {pitch}")
    blocks = []
    for box in env.boxes:
        axes = []
        for lo, hi in zip(box.lo, box.hi):
            steps = max(1, int(math.ceil((hi - lo) / pitch)))
            axes.append(np.linspace(lo, hi, steps + 1))
        mesh = np.meshgrid(*axes, indexing="ij")
        blocks.append(np.stack([m.reshape(-1) for m in mesh], axis=1))
    return np.concatenate(blocks)


def net_check(
    samples: PointLike, env: Environment, alpha: float, grid_pitch: Optional[float] = None
) -> bool:
    """
    Sound test that samples form an alpha-net.

    Passes when every free-space grid point lies within
    alpha - grid_pitch * sqrt(d) / 2 of some sample. A pass proves the net
    property; a failure does not disprove it.

    Args:
        samples: (n, d) sample points
        env: Free space
        alpha: Net radius
        grid_pitch: Grid spacing, defaults to alpha * settings.net_check_pitch_fraction

    Raises:
        ValueError: If grid_pitch * sqrt(d) / 2 >= alpha
    """
    pitch = grid_pitch if grid_pitch is not None else alpha * settings.net_check_pitch_fraction
    slack = pitch * math.sqrt(env.dim) / 2.0
    if not slack < alpha:
        raise ValueError(
            f"Grid pitch {pitch} too coarse for alpha={alpha}: pitch * sqrt(d) / 2 = {slack:.6g} must be < alpha"
        )
    pts = as_points(env, samples, "samples")
    if len(pts) == 0:
        return False

    grid = free_space_grid(env, pitch)
    _, nearest = GridIndex(pts).nearest_many(grid)
    worst = float(nearest.max())
    passed = worst <= alpha - slack
    logger.debug(
        f"Net check: {len(grid)} grid points, worst gap {worst:.6g} vs allowance {alpha - slack:.6g} -> {passed}"
    )
    return passed
