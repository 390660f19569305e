"""
TAMP Planner
Skeleton queue over motion-planning subproblems. Each subproblem keeps one
growing roadmap across attempts; a failed query shrinks its assumed clearance
and failure budget and sends the skeleton to the back of the queue.
"""

import time
from collections import deque
from typing import List, Optional, Union

from loguru import logger
from pydantic import BaseModel, Field

from config import settings
from roadmap_bounds.geometry.environment import volume
from roadmap_bounds.prm.roadmap import Knn, construct, query
from roadmap_bounds.scheduler.strategies import (
    AprmConfig,
    IprmConfig,
    SprmConfig,
    adjust_width_and_failure,
    exhausted_after_failure,
    sample_target,
)
from roadmap_bounds.scheduler.task_generator import Skeleton, SkeletonStatus, Subproblem
from roadmap_bounds.utils.seeding import SeedLike, as_generator

StrategyLike = Union[AprmConfig, SprmConfig, IprmConfig]


class SampleBudgetExceeded(Exception):
    """A subproblem asked for more samples than the per-subproblem ceiling"""


class PlanResult(BaseModel):
    """Outcome of one planning run"""
    success: bool
    skeleton: Optional[str] = Field(default=None, description="Name of the solved skeleton")
    paths: Optional[List[List[List[float]]]] = Field(default=None, description="One path per subproblem")
    queue_pops: int = 0
    total_samples: int = Field(default=0, description="Sum of vertices added over all constructions")
    constructions: int = 0
    pruned: List[str] = Field(default_factory=list)
    seconds: float = 0.0

    def __str__(self) -> str:
        outcome = f"solved {self.skeleton}" if self.success else "exhausted"
        return f"{outcome} after {self.queue_pops} pops, {self.total_samples} samples"


class _Counters:
    def __init__(self):
        self.samples = 0
        self.constructions = 0


def _attempt(
    sp: Subproblem,
    strategy: StrategyLike,
    rng,
    max_samples: int,
    counters: _Counters,
) -> Optional[int]:
    """
    Grow sp's roadmap to this attempt's target and query it.

    Returns the target on failure, None on success. Raises SampleBudgetExceeded when
    the target exceeds max_samples.
    """
    free_volume = volume(sp.env)
    target = sample_target(strategy, free_volume, sp.delta, sp.gamma, sp.env.dim, sp.attempts)
    if target > max_samples:
        raise SampleBudgetExceeded(f"{sp.name} needs {target} samples, limit is {max_samples}")

    prev = sp.saved_graph
    if prev is None:
        seed = int(rng.integers(0, 2 ** 63))
        graph = construct(sp.env, target, Knn(k=strategy.k), rng=seed)
        added = graph.size
    else:
        graph = construct(sp.env, max(target, prev.size), prev.strategy, prev=prev)
        added = graph.size - prev.size
    counters.samples += added
    counters.constructions += 1
    sp.saved_graph = graph
    sp.attempts += 1

    path = query(graph, sp.env, sp.x_s, sp.x_g)
    logger.debug(
        f"  {sp.name}: delta={sp.delta:.4g}, gamma={sp.gamma:.3g}, {graph.size} vertices -> "
        f"{'path' if path is not None else 'no path'}"
    )
    if path is None:
        return target
    sp.path = [p.tolist() for p in path]
    return None


def tamp_plan(
    skeletons: List[Skeleton],
    strategy: StrategyLike,
    delta_min: Optional[float] = None,
    rng: SeedLike = None,
    max_subproblem_samples: Optional[int] = None,
) -> PlanResult:
    """
    Solve skeletons in FIFO order until one has a path for every subproblem.

    Skeletons are updated in place: subproblems keep their roadmaps, paths,
    attempt counts and adjusted (delta, gamma) between pops.

    Under aPRM a skeleton that keeps failing is tried at delta0, delta0 / 2, ...
    down to the last clearance not below delta_min, and pruned when the next
    halving would fall below it. That is floor(log2(delta0 / delta_min)) + 1
    pops with one re-queue fewer, which never exceeds
    ceil(log2(delta0 / delta_min)) pops unless the ratio is a power of two.

    Args:
        skeletons: Candidate skeletons, at least one
        strategy: aPRM, sPRM or iPRM configuration
        delta_min: aPRM prunes once the halved clearance falls below it
        rng: Planner stream; each subproblem's roadmap seed is drawn from it
        max_subproblem_samples: Larger sample targets prune the skeleton

    Returns:
        PlanResult with the first solved skeleton's paths, or an exhaustion report
    """
    if not skeletons:
        raise ValueError("tamp_plan needs at least one skeleton")
    delta_min = delta_min if delta_min is not None else settings.delta_min
    max_samples = max_subproblem_samples or settings.max_subproblem_samples
    rng = as_generator(rng)
    counters = _Counters()
    started = time.perf_counter()

    queue = deque(skeletons)
    pops = 0
    pruned: List[str] = []
    while queue:
        skeleton = queue.popleft()
        pops += 1
        skeleton.attempts += 1

        failed: Optional[Subproblem] = None
        failed_target = 0
        try:
            for sp in skeleton.subproblems:
                if sp.path is not None:
                    continue
                target = _attempt(sp, strategy, rng, max_samples, counters)
                if target is not None:
                    failed, failed_target = sp, target
                    break
        except SampleBudgetExceeded as e:
            logger.warning(f"Pruning {skeleton.name}: {e}")
            skeleton.status = SkeletonStatus.PRUNED
            pruned.append(skeleton.name)
            continue

        if failed is None:
            skeleton.status = SkeletonStatus.SOLVED
            result = PlanResult(
                success=True,
                skeleton=skeleton.name,
                paths=[sp.path for sp in skeleton.subproblems],
                queue_pops=pops,
                total_samples=counters.samples,
                constructions=counters.constructions,
                pruned=pruned,
                seconds=time.perf_counter() - started,
            )
            logger.info(f"✓ Plan {strategy.label}: {result}")
            return result

        next_delta, next_gamma = adjust_width_and_failure(failed.delta, failed.gamma)
        if exhausted_after_failure(strategy, failed_target, next_delta, delta_min):
            logger.warning(
                f"Pruning {skeleton.name}: {failed.name} failed at {failed_target} samples "
                f"(next delta {next_delta:.4g}, delta_min {delta_min:.4g})"
            )
            skeleton.status = SkeletonStatus.PRUNED
            pruned.append(skeleton.name)
            continue
        failed.delta, failed.gamma = next_delta, next_gamma
        queue.append(skeleton)

    result = PlanResult(
        success=False,
        queue_pops=pops,
        total_samples=counters.samples,
        constructions=counters.constructions,
        pruned=pruned,
        seconds=time.perf_counter() - started,
    )
    logger.info(f"✗ Plan {strategy.label}: {result}")
    return result
