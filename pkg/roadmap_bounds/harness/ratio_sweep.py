"""
Ratio Sweep
Runs the connection-radius / net-radius diagnostic over sample counts and dimensions.
"""

import time
from typing import Dict, List, Optional, Sequence

import numpy as np
from loguru import logger

from roadmap_bounds.bounds.radius_bounds import ratio_diagnostic

RATIO_COLUMNS = ("n", "net_radius", "conn_radius", "ratio")
SWEEP_COLUMNS = ("d",) + RATIO_COLUMNS

# Bisection tolerance for the connection radius; radii of interest shrink far below 1e-6.
SWEEP_EPS = 1e-10


def decade_values(lo_exp: int, hi_exp: int, per_decade: int = 1) -> List[int]:
    """Sample counts 10^lo_exp .. 10^hi_exp with per_decade log-spaced points per decade"""
    if hi_exp < lo_exp or per_decade < 1:
        raise ValueError(f"Bad decade range: {lo_exp}..{hi_exp} with {per_decade} per decade")
    count = (hi_exp - lo_exp) * per_decade + 1
    values = np.round(np.logspace(lo_exp, hi_exp, count)).astype(np.int64)
    return sorted(set(int(v) for v in values))


def run_ratio_sweep(
    k: int,
    gamma: float,
    dims: Sequence[int],
    n_values: Sequence[int],
    free_volume: float = 1.0,
    eps: float = SWEEP_EPS,
    r_max: Optional[float] = None,
) -> List[Dict[str, object]]:
    """
    One row per (d, n) with columns d, n, net_radius, conn_radius, ratio.

    ratio = conn_radius / (4 * net_radius); values below 1 mean the KNN radius
    never reaches what the net argument requires. Missing bounds leave empty cells.
    """
    rows: List[Dict[str, object]] = []
    for d in dims:
        started = time.perf_counter()
        for entry in ratio_diagnostic(k, gamma, d, free_volume, list(n_values), eps=eps, r_max=r_max):
            rows.append({"d": d, **entry.model_dump(include=set(RATIO_COLUMNS))})
        logger.info(f"✓ Ratio sweep d={d}: {len(n_values)} sample counts in {time.perf_counter() - started:.2f}s")

    worst = max((r["ratio"] for r in rows if r["ratio"] is not None), default=None)
    if worst is not None:
        logger.info(f"  Largest ratio {worst:.4g} ({'below' if worst < 1.0 else 'at or above'} the threshold 1)")
    return rows
