"""
Radius Experiment
Empirical concentration of the (K+1)-th nearest-neighbor distance for uniform
samples in the unit cube, compared with the numerical and closed-form radius bounds.
"""

from typing import List, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field
from tqdm import tqdm

from config import settings
from roadmap_bounds.bounds.radius_bounds import RadiusQuery, closed_form_radius, numerical_radius_bound
from roadmap_bounds.prm.roadmap import min_k1_distance_of_points
from roadmap_bounds.utils.seeding import as_generator, trial_seed

EXPERIMENT_GAMMA = 0.01
EXPERIMENT_R_MAX = 0.5


class RadiusExperimentReport(BaseModel):
    """Per-trial minimum (K+1)-NN distances and their comparison with the bounds"""
    d: int
    k: int
    n: int
    trials: int
    gamma: float
    master_seed: int
    numerical_radius: Optional[float]
    closed_form_radius: Optional[float]
    min_distances: List[float]
    exceed_fraction: float = Field(description="Fraction of trials whose minimum exceeds the numerical radius")
    median: float
    mean: float
    minimum: float
    maximum: float

    def __str__(self) -> str:
        return (
            f"d={self.d}, K={self.k}, n={self.n}: bound {self.numerical_radius}, "
            f"median min distance {self.median:.6g}, exceed {self.exceed_fraction:.2f}"
        )


def knn_radius_empirical(
    d: int,
    k: int,
    n: int,
    trials: int,
    master_seed: int,
    gamma: float = EXPERIMENT_GAMMA,
    eps: Optional[float] = None,
    show_progress: Optional[bool] = None,
) -> RadiusExperimentReport:
    """
    Sample n uniform points in [0, 1]^d per trial and record min_v ||v - nn_{K+1}(v)||.

    Any radius below that minimum is a connection radius of the KNN graph, so
    the numerical bound should sit below it in at least a (1 - gamma) share of
    trials.

    Raises:
        ValueError: If n <= k + 1 or trials < 1
    """
    if n <= k + 1:
        raise ValueError(f"Need n > K + 1, got n={n}, K={k}")
    if trials < 1:
        raise ValueError(f"Need at least one trial, got {trials}")
    progress = settings.show_progress if show_progress is None else show_progress

    radius_query = RadiusQuery(
        k=k, n=n, gamma=gamma, dim=d, free_volume=1.0, r_max=EXPERIMENT_R_MAX,
        eps=eps if eps is not None else settings.radius_eps,
    )
    numerical = numerical_radius_bound(radius_query).radius
    closed = closed_form_radius(radius_query).radius

    minima: List[float] = []
    for i in tqdm(range(trials), desc="Radius trials", disable=not progress, leave=False):
        rng = as_generator(trial_seed(master_seed, i))
        points = rng.random((n, d))
        minima.append(min_k1_distance_of_points(points, k))

    values = np.asarray(minima)
    threshold = numerical if numerical is not None else 0.0
    report = RadiusExperimentReport(
        d=d, k=k, n=n, trials=trials, gamma=gamma, master_seed=master_seed,
        numerical_radius=numerical,
        closed_form_radius=closed,
        min_distances=minima,
        exceed_fraction=float(np.mean(values > threshold)),
        median=float(np.median(values)),
        mean=float(values.mean()),
        minimum=float(values.min()),
        maximum=float(values.max()),
    )
    logger.info(f"✓ Radius experiment: {report}")
    return report
