"""
Task Generator
Seeded skeletons of hallway subproblems for a disk robot carrying objects:
each object adds a carry trip at reduced clearance and an empty-handed return.
"""

from enum import Enum
from typing import List, Optional, Tuple, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import settings
from roadmap_bounds.geometry.environment import Environment, contains, make_hallway
from roadmap_bounds.prm.roadmap import PrmGraph
from roadmap_bounds.scheduler.strategies import StrategyConfig
from roadmap_bounds.utils.seeding import as_generator


class Subproblem(BaseModel):
    """One motion-planning query with its assumed clearance, failure budget and saved roadmap"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = ""
    env: Environment
    x_s: List[float]
    x_g: List[float]
    delta: float = Field(gt=0.0, description="Currently assumed clearance")
    gamma: float = Field(gt=0.0, lt=1.0, description="Current failure budget")
    saved_graph: Optional[PrmGraph] = None
    path: Optional[List[List[float]]] = None
    attempts: int = Field(default=0, description="Roadmap constructions so far")

    @model_validator(mode="after")
    def check_endpoints(self) -> "Subproblem":
        for label, point in (("x_s", self.x_s), ("x_g", self.x_g)):
            if len(point) != self.env.dim:
                raise ValueError(f"{label} has dimension {len(point)}, environment has {self.env.dim}")
            if not contains(self.env, point):
                raise ValueError(f"{label}={point} lies outside the free space")
        return self


class SkeletonStatus(str, Enum):
    PENDING = "pending"
    SOLVED = "solved"
    PRUNED = "pruned"


class Skeleton(BaseModel):
    """Ordered subproblems induced by one task-level plan"""
    name: str = "skeleton"
    subproblems: List[Subproblem] = Field(min_length=1)
    attempts: int = 0
    status: SkeletonStatus = SkeletonStatus.PENDING

    @property
    def solved(self) -> bool:
        return all(sp.path is not None for sp in self.subproblems)


class HallwayShape(BaseModel):
    d: int = Field(default=2, ge=2)
    half_width: float = Field(gt=0.0, lt=0.5, description="Physical hallway half-width")


class TaskSpec(BaseModel):
    """
    JSON task family: a disk robot moves objects one by one through a hallway.

    Clearance of a carry trip is half_width - (robot_radius + object_radius);
    of a return trip, half_width - robot_radius.
    """
    robot_radius: float = Field(gt=0.0)
    object_radius_range: Tuple[float, float]
    object_count_range: Tuple[int, int]
    hallway: HallwayShape
    strategies: List[StrategyConfig] = Field(default_factory=list)
    seeds: Union[int, List[int]] = Field(default=10, description="Seed list, or a count meaning range(count)")
    delta_min: float = Field(default_factory=lambda: settings.delta_min, gt=0.0)

    @field_validator("seeds")
    @classmethod
    def expand_seeds(cls, v: Union[int, List[int]]) -> List[int]:
        seeds = list(range(v)) if isinstance(v, int) else list(v)
        if any(s < 0 for s in seeds):
            raise ValueError("seeds must be non-negative")
        return seeds

    @model_validator(mode="after")
    def check_clearances(self) -> "TaskSpec":
        r_lo, r_hi = self.object_radius_range
        c_lo, c_hi = self.object_count_range
        if not 0.0 < r_lo <= r_hi:
            raise ValueError(f"object_radius_range must satisfy 0 < lo <= hi, got {self.object_radius_range}")
        if not 1 <= c_lo <= c_hi:
            raise ValueError(f"object_count_range must satisfy 1 <= lo <= hi, got {self.object_count_range}")
        if hardest_clearance(self) <= 0.0:
            raise ValueError(
                f"Largest object (radius {r_hi}) and robot (radius {self.robot_radius}) "
                f"do not fit through a hallway of half-width {self.hallway.half_width}"
            )
        return self


def hardest_clearance(spec: TaskSpec) -> float:
    """Clearance of a carry trip with the largest possible object"""
    return spec.hallway.half_width - (spec.robot_radius + spec.object_radius_range[1])


def _trip(name: str, d: int, clearance: float, gamma: float, reverse: bool = False) -> Subproblem:
    left = [-1.0] + [0.0] * (d - 1)
    right = [1.0] + [0.0] * (d - 1)
    x_s, x_g = (right, left) if reverse else (left, right)
    return Subproblem(name=name, env=make_hallway(d, clearance), x_s=x_s, x_g=x_g, delta=clearance, gamma=gamma)


def generate_skeleton(spec: TaskSpec, seed: int, gamma: float = 0.1) -> Skeleton:
    """
    Skeleton for one task instance drawn from seed.

    Object count is uniform over object_count_range (inclusive) and radii are
    uniform over object_radius_range. Every subproblem starts with its true
    clearance as the assumed delta.
    """
    rng = as_generator(seed)
    count_lo, count_hi = spec.object_count_range
    count = int(rng.integers(count_lo, count_hi + 1))
    radii = rng.uniform(spec.object_radius_range[0], spec.object_radius_range[1], size=count)

    d = spec.hallway.d
    carry_free = spec.hallway.half_width - spec.robot_radius
    subproblems: List[Subproblem] = []
    for i, radius in enumerate(radii):
        subproblems.append(_trip(f"carry_{i}", d, carry_free - float(radius), gamma))
        subproblems.append(_trip(f"return_{i}", d, carry_free, gamma, reverse=True))

    logger.debug(
        f"Seed {seed}: {count} objects, clearances "
        f"{min(sp.delta for sp in subproblems):.3f}..{max(sp.delta for sp in subproblems):.3f}"
    )
    return Skeleton(name=f"task_{seed}", subproblems=subproblems)


def blocked_skeleton(d: int = 2, delta0: float = 0.4, gamma: float = 0.1) -> Skeleton:
    """Two end rooms with the hallway removed; the query is infeasible"""
    hallway = make_hallway(d, 0.25)
    env = Environment(dim=d, boxes=hallway.boxes[:2])
    x_s = [-1.0] + [0.0] * (d - 1)
    x_g = [1.0] + [0.0] * (d - 1)
    return Skeleton(
        name="blocked",
        subproblems=[Subproblem(name="blocked", env=env, x_s=x_s, x_g=x_g, delta=delta0, gamma=gamma)],
    )
