"""
Sampling Strategies
Per-subproblem sample targets for the adaptive (aPRM), fixed (sPRM) and
geometrically incremented (iPRM) strategies, and the width/failure adjustment.
"""

import math
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import settings
from roadmap_bounds.bounds.sample_bounds import samples_for_clearance


class AprmConfig(BaseModel):
    """Sample target from the numerical bound at the current (delta, gamma)"""
    model_config = ConfigDict(frozen=True)
    kind: Literal["aprm"] = "aprm"
    gamma: float = Field(default=0.1, gt=0.0, lt=1.0, description="Initial failure budget")
    k: int = Field(default_factory=lambda: settings.knn_k, ge=1)

    @property
    def label(self) -> str:
        return f"aPRM(gamma={self.gamma!r},K={self.k})"


class SprmConfig(BaseModel):
    """
    Fixed sample count for every subproblem.

    Either n_fixed directly, or bound_factor times the aPRM target of the
    family's narrowest trip (resolved by the comparison before planning).
    """
    model_config = ConfigDict(frozen=True)
    kind: Literal["sprm"] = "sprm"
    n_fixed: Optional[int] = Field(default=None, ge=1)
    bound_factor: Optional[float] = Field(default=None, gt=0.0, description="Multiple of the hardest aPRM bound")
    k: int = Field(default_factory=lambda: settings.knn_k, ge=1)

    @model_validator(mode="after")
    def check_budget_source(self) -> "SprmConfig":
        if (self.n_fixed is None) == (self.bound_factor is None):
            raise ValueError("Give exactly one of 'n_fixed' or 'bound_factor'")
        return self

    @property
    def label(self) -> str:
        if self.n_fixed is None:
            return f"sPRM(N={self.bound_factor!r}*bound,K={self.k})"
        return f"sPRM(N={self.n_fixed},K={self.k})"


class IprmConfig(BaseModel):
    """Sample count multiplied by c after every failed attempt, capped at n_max"""
    model_config = ConfigDict(frozen=True)
    kind: Literal["iprm"] = "iprm"
    m0: int = Field(ge=1)
    c: float = Field(default=1.1, gt=1.0)
    n_max: int = Field(ge=1)
    k: int = Field(default_factory=lambda: settings.knn_k, ge=1)

    @model_validator(mode="after")
    def check_cap(self) -> "IprmConfig":
        if self.n_max < self.m0:
            raise ValueError(f"n_max={self.n_max} must be at least m0={self.m0}")
        return self

    @property
    def label(self) -> str:
        return f"iPRM(m0={self.m0},c={self.c!r},N_max={self.n_max},K={self.k})"


StrategyConfig = Annotated[Union[AprmConfig, SprmConfig, IprmConfig], Field(discriminator="kind")]


def compute_new_samples(free_volume: float, delta: float, gamma: float, d: int) -> int:
    """
    aPRM sample target: numerical bound with p = ball_measure(d, delta / 2, free_volume).

    The radius that the net argument prescribes is not imposed on the KNN roadmap.
    """
    return samples_for_clearance(d, delta, gamma, free_volume).samples


def adjust_width_and_failure(delta: float, gamma: float) -> Tuple[float, float]:
    """Halve both the assumed clearance and the failure budget"""
    if not delta > 0.0 or not gamma > 0.0:
        raise ValueError(f"delta and gamma must be positive, got delta={delta}, gamma={gamma}")
    return delta / 2.0, gamma / 2.0


def iprm_schedule(m0: int, c: float, n_max: int) -> List[int]:
    """
    Per-attempt sample counts m0, ceil(c * m0), ... up to and including n_max.

    The product is rounded to 9 decimals before the ceiling so 1.1 * 100 gives 110.
    """
    if m0 < 1 or n_max < m0 or not c > 1.0:
        raise ValueError(f"Invalid iPRM schedule parameters m0={m0}, c={c}, n_max={n_max}")
    schedule = [m0]
    while schedule[-1] < n_max:
        grown = max(schedule[-1] + 1, math.ceil(round(c * schedule[-1], 9)))
        schedule.append(min(grown, n_max))
    return schedule


def iprm_target(strategy: IprmConfig, attempt: int) -> int:
    """Sample count of the attempt-th try (0-based)"""
    count = strategy.m0
    for _ in range(attempt):
        if count >= strategy.n_max:
            break
        count = min(max(count + 1, math.ceil(round(strategy.c * count, 9))), strategy.n_max)
    return count


def sample_target(
    strategy: Union[AprmConfig, SprmConfig, IprmConfig],
    free_volume: float,
    delta: float,
    gamma: float,
    d: int,
    attempt: int,
) -> int:
    """Vertex count a subproblem's roadmap must reach on this attempt"""
    if isinstance(strategy, AprmConfig):
        return compute_new_samples(free_volume, delta, gamma, d)
    if isinstance(strategy, SprmConfig):
        if strategy.n_fixed is None:
            raise ValueError(f"{strategy.label} must be resolved against a task family before planning")
        return strategy.n_fixed
    return iprm_target(strategy, attempt)


def exhausted_after_failure(
    strategy: Union[AprmConfig, SprmConfig, IprmConfig],
    target: int,
    next_delta: float,
    delta_min: float,
) -> bool:
    """
    Whether a failed subproblem leaves nothing further to try.

    aPRM stops once the halved clearance drops below delta_min. sPRM cannot
    grow past n_fixed and iPRM stops after failing at n_max; neither reads delta.
    """
    if isinstance(strategy, SprmConfig):
        return True
    if isinstance(strategy, IprmConfig):
        return target >= strategy.n_max
    return next_delta < delta_min
