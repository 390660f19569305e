"""
Strategy Comparison
Runs every strategy on every seeded task instance of a family and aggregates
success, samples and wall time per strategy.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple, Union

from loguru import logger
from pydantic import BaseModel, Field, TypeAdapter
from tqdm import tqdm

from config import settings
from roadmap_bounds.geometry.environment import make_hallway, volume
from roadmap_bounds.scheduler.strategies import (
    AprmConfig,
    IprmConfig,
    SprmConfig,
    StrategyConfig,
    compute_new_samples,
)
from roadmap_bounds.scheduler.tamp_planner import tamp_plan
from roadmap_bounds.scheduler.task_generator import TaskSpec, generate_skeleton, hardest_clearance

COMPARISON_COLUMNS = ("strategy", "seed", "success", "total_samples", "seconds")

_strategy_adapter = TypeAdapter(StrategyConfig)


class ComparisonRow(BaseModel):
    strategy: str
    seed: int
    success: bool
    total_samples: int
    seconds: float


class StrategyAggregate(BaseModel):
    strategy: str
    runs: int
    success_fraction: float = Field(ge=0.0, le=1.0)
    total_samples: int
    total_seconds: float


class ComparisonReport(BaseModel):
    rows: List[ComparisonRow]
    aggregates: List[StrategyAggregate]

    def aggregate(self, label: str) -> StrategyAggregate:
        for agg in self.aggregates:
            if agg.strategy == label:
                return agg
        raise KeyError(f"No strategy labelled {label!r}")


def hardest_bound(spec: TaskSpec, gamma: float = 0.1) -> int:
    """aPRM sample target of the narrowest carry trip the family can produce"""
    delta = hardest_clearance(spec)
    env = make_hallway(spec.hallway.d, delta)
    return compute_new_samples(volume(env), delta, gamma, spec.hallway.d)


def resolve_strategy(
    spec: TaskSpec, strategy: Union[AprmConfig, SprmConfig, IprmConfig]
) -> Union[AprmConfig, SprmConfig, IprmConfig]:
    """Turn an sPRM bound_factor into a concrete n_fixed; other configs pass through"""
    if not isinstance(strategy, SprmConfig) or strategy.n_fixed is not None:
        return strategy
    n_fixed = max(1, int(strategy.bound_factor * hardest_bound(spec)))
    logger.debug(f"{strategy.label} resolves to N={n_fixed}")
    return SprmConfig(n_fixed=n_fixed, k=strategy.k)


def _initial_gamma(strategy: Union[AprmConfig, SprmConfig, IprmConfig]) -> float:
    return strategy.gamma if isinstance(strategy, AprmConfig) else 0.1


def run_instance(spec: TaskSpec, strategy: Union[AprmConfig, SprmConfig, IprmConfig], seed: int) -> ComparisonRow:
    """
    Plan one task instance with one strategy.

    The skeleton and the planner stream both derive from seed, so every
    strategy sees the same task and the same roadmap seeds.
    """
    strategy = resolve_strategy(spec, strategy)
    skeleton = generate_skeleton(spec, seed, gamma=_initial_gamma(strategy))
    result = tamp_plan([skeleton], strategy, delta_min=spec.delta_min, rng=seed)
    return ComparisonRow(
        strategy=strategy.label,
        seed=seed,
        success=result.success,
        total_samples=result.total_samples,
        seconds=result.seconds,
    )


def _run_block(payload: Tuple[str, str, List[int]]) -> List[ComparisonRow]:
    """Process-pool entry point"""
    spec_json, strategy_json, seeds = payload
    spec = TaskSpec.model_validate_json(spec_json)
    strategy = _strategy_adapter.validate_json(strategy_json)
    return [run_instance(spec, strategy, seed) for seed in seeds]


def _aggregate(label: str, rows: List[ComparisonRow]) -> StrategyAggregate:
    return StrategyAggregate(
        strategy=label,
        runs=len(rows),
        success_fraction=sum(r.success for r in rows) / len(rows) if rows else 0.0,
        total_samples=sum(r.total_samples for r in rows),
        total_seconds=sum(r.seconds for r in rows),
    )


def compare_strategies(
    spec: TaskSpec,
    strategies: Optional[Sequence[Union[AprmConfig, SprmConfig, IprmConfig]]] = None,
    seeds: Optional[Sequence[int]] = None,
    workers: Optional[int] = None,
    show_progress: Optional[bool] = None,
) -> ComparisonReport:
    """
    Run every (strategy, seed) pair and aggregate per strategy.

    sPRM budgets given as bound_factor are resolved first. Labels carry every
    field that changes planning, and a strategy listed twice is rejected.

    Args:
        spec: Task family
        strategies: Defaults to spec.strategies
        seeds: Defaults to spec.seeds
        workers: Process count; defaults to settings.workers
        show_progress: tqdm bar; defaults to settings.show_progress

    Returns:
        ComparisonReport with rows ordered by strategy then seed
    """
    given = strategies if strategies is not None else spec.strategies
    strategies = [resolve_strategy(spec, s) for s in given]
    seeds = list(seeds if seeds is not None else spec.seeds)
    if not strategies:
        raise ValueError("No strategies to compare")
    labels = [s.label for s in strategies]
    repeated = sorted({label for label in labels if labels.count(label) > 1})
    if repeated:
        raise ValueError(f"Strategies listed more than once: {', '.join(repeated)}")
    workers = workers or settings.workers
    progress = settings.show_progress if show_progress is None else show_progress

    rows: List[ComparisonRow] = []
    aggregates: List[StrategyAggregate] = []
    for strategy in strategies:
        logger.info(f"Running {strategy.label} on {len(seeds)} task instances")
        if workers > 1 and len(seeds) > 1:
            blocks = [seeds[w::workers] for w in range(workers)]
            payloads = [
                (spec.model_dump_json(), strategy.model_dump_json(), block) for block in blocks if block
            ]
            try:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    strategy_rows = [row for chunk in pool.map(_run_block, payloads) for row in chunk]
            except Exception as e:
                raise RuntimeError(f"Comparison worker pool failed: {e}") from e
            strategy_rows.sort(key=lambda r: seeds.index(r.seed))
        else:
            strategy_rows = [
                run_instance(spec, strategy, seed)
                for seed in tqdm(seeds, desc=strategy.label, disable=not progress, leave=False)
            ]
        rows.extend(strategy_rows)
        aggregates.append(_aggregate(strategy.label, strategy_rows))
        logger.info(
            f"✓ {strategy.label}: success {aggregates[-1].success_fraction:.2f}, "
            f"{aggregates[-1].total_samples} samples"
        )
    return ComparisonReport(rows=rows, aggregates=aggregates)
