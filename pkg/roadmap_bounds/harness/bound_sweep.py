"""
Bound Sweep
Sample bounds across failure probabilities: the numerical search, the closed
form and the asymptotic scaling side by side for an alpha-net of a box.
"""

import time
from typing import Dict, List, Sequence

import numpy as np
from loguru import logger

from roadmap_bounds.bounds.sample_bounds import (
    BoundQuery,
    asymptotic_samples,
    ball_measure,
    closed_form_bound,
    numerical_sample_bound,
)

BOUND_SWEEP_COLUMNS = ("d", "gamma", "p", "numerical", "closed_form", "asymptotic")


def gamma_values(lo_exp: int, hi_exp: int, per_decade: int = 1) -> List[float]:
    """Failure probabilities 10^-lo_exp down to 10^-hi_exp, log-spaced, largest first"""
    if hi_exp < lo_exp or lo_exp < 1 or per_decade < 1:
        raise ValueError(f"Bad gamma range: 1e-{lo_exp}..1e-{hi_exp} with {per_decade} per decade")
    count = (hi_exp - lo_exp) * per_decade + 1
    return [float(g) for g in np.logspace(-lo_exp, -hi_exp, count)]


def run_bound_sweep(
    dims: Sequence[int],
    gammas: Sequence[float],
    alpha: float = 0.5,
    free_volume: float = 1.0,
) -> List[Dict[str, object]]:
    """
    One row per (d, gamma) for an alpha-net of a free space of the given volume.

    The asymptotic column uses clearance 2 * alpha, the clearance an alpha-net
    serves. The numerical column never exceeds the closed form.

    Raises:
        ValueError: If an alpha-ball already covers the free space in some d
    """
    rows: List[Dict[str, object]] = []
    for d in dims:
        p = ball_measure(d, alpha, free_volume)
        if p >= 1.0:
            raise ValueError(f"An alpha-ball of radius {alpha} covers volume {free_volume} in d={d} (p={p:.6g})")
        started = time.perf_counter()
        for gamma in gammas:
            query = BoundQuery(dim=d, ball_measure=p, gamma=gamma)
            rows.append({
                "d": d,
                "gamma": gamma,
                "p": p,
                "numerical": numerical_sample_bound(query).samples,
                "closed_form": closed_form_bound(query).samples,
                "asymptotic": asymptotic_samples(d, 2.0 * alpha, gamma),
            })
        logger.info(f"✓ Bound sweep d={d}: {len(gammas)} failure probabilities in {time.perf_counter() - started:.2f}s")
    return rows
