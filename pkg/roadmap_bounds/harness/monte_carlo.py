"""
Monte Carlo Harness
Seeded success-probability estimates: build an independent roadmap per trial,
run the hallway query, aggregate successes.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, model_validator
from tqdm import tqdm

from config import settings
from roadmap_bounds.geometry.environment import Environment, load_environment, make_hallway
from roadmap_bounds.prm.roadmap import ConnectionStrategy, Knn, construct, query
from roadmap_bounds.utils.seeding import trial_seed


class HallwaySpec(BaseModel):
    """Parameters of make_hallway"""
    d: int = Field(ge=2, description="Dimension")
    delta: float = Field(gt=0.0, lt=0.5, description="Hallway half-width")


class McConfig(BaseModel):
    """One Monte Carlo experiment: environment, roadmap size and strategy, trials and seed"""
    hallway: Optional[HallwaySpec] = None
    env_file: Optional[Path] = None
    n_samples: int = Field(ge=1, description="Vertices per roadmap")
    strategy: ConnectionStrategy = Field(default_factory=lambda: Knn(k=settings.knn_k))
    trials: int = Field(default=100, ge=1)
    master_seed: int = Field(default_factory=lambda: settings.default_seed, ge=0, lt=2 ** 64)
    query: Optional[Tuple[List[float], List[float]]] = Field(
        default=None, description="(x_s, x_g); defaults to the hallway ends (-0.5, 0, ...) and (0.5, 0, ...)"
    )

    @model_validator(mode="after")
    def check_environment_source(self) -> "McConfig":
        if (self.hallway is None) == (self.env_file is None):
            raise ValueError("Give exactly one of 'hallway' or 'env_file'")
        return self

    def environment(self) -> Environment:
        if self.hallway is not None:
            return make_hallway(self.hallway.d, self.hallway.delta)
        return load_environment(self.env_file)

    def endpoints(self, dim: int) -> Tuple[np.ndarray, np.ndarray]:
        if self.query is not None:
            return np.asarray(self.query[0], dtype=float), np.asarray(self.query[1], dtype=float)
        x_s = np.zeros(dim)
        x_g = np.zeros(dim)
        x_s[0], x_g[0] = -0.5, 0.5
        return x_s, x_g


class TrialOutcome(BaseModel):
    index: int
    seed: int
    success: bool
    build_time: float
    query_time: float


class TrialReport(BaseModel):
    """Aggregated outcome of a seeded Monte Carlo experiment"""
    successes: int
    trials: int
    p_hat: float = Field(ge=0.0, le=1.0)
    wall_time_per_trial: float
    per_trial: List[TrialOutcome]

    def __str__(self) -> str:
        return f"{self.successes}/{self.trials} successes (p_hat={self.p_hat:.2f})"


def run_trial(cfg: McConfig, index: int, env: Optional[Environment] = None) -> TrialOutcome:
    """Build and query the roadmap of one trial; depends only on (cfg, index)"""
    env = env if env is not None else cfg.environment()
    seed = trial_seed(cfg.master_seed, index)
    x_s, x_g = cfg.endpoints(env.dim)

    started = time.perf_counter()
    roadmap = construct(env, cfg.n_samples, cfg.strategy, rng=seed)
    built = time.perf_counter()
    path = query(roadmap, env, x_s, x_g)
    finished = time.perf_counter()

    logger.debug(f"Trial {index} (seed {seed}): {'success' if path is not None else 'failure'}")
    return TrialOutcome(
        index=index,
        seed=seed,
        success=path is not None,
        build_time=built - started,
        query_time=finished - built,
    )


def _run_trial_block(payload: Tuple[str, List[int]]) -> List[TrialOutcome]:
    """Process-pool entry point; the config travels as JSON"""
    cfg_json, indices = payload
    cfg = McConfig.model_validate_json(cfg_json)
    env = cfg.environment()
    return [run_trial(cfg, i, env) for i in indices]


def mc_success_estimate(
    cfg: McConfig, workers: Optional[int] = None, show_progress: Optional[bool] = None
) -> TrialReport:
    """
    Estimate the probability that the roadmap answers the query.

    Trial i always uses trial_seed(master_seed, i), so serial and parallel runs
    produce identical reports apart from timings.

    Args:
        cfg: Experiment configuration
        workers: Process count; defaults to settings.workers
        show_progress: tqdm bar; defaults to settings.show_progress

    Returns:
        TrialReport with per-trial outcomes in trial order
    """
    workers = workers or settings.workers
    progress = settings.show_progress if show_progress is None else show_progress
    env = cfg.environment()
    x_s, x_g = cfg.endpoints(env.dim)
    if len(x_s) != env.dim or len(x_g) != env.dim:
        raise ValueError(f"Query endpoints must have dimension {env.dim}")

    outcomes: List[TrialOutcome] = []
    if workers > 1 and cfg.trials > 1:
        blocks = [list(range(w, cfg.trials, workers)) for w in range(workers)]
        payloads = [(cfg.model_dump_json(), block) for block in blocks if block]
        try:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for chunk in tqdm(pool.map(_run_trial_block, payloads), total=len(payloads),
                                  desc="Trial blocks", disable=not progress, leave=False):
                    outcomes.extend(chunk)
        except ValueError:
            # Bad input from a worker stays a ValueError, not a pool failure
            raise
        except Exception as e:
            raise RuntimeError(f"Monte Carlo worker pool failed: {e}") from e
    else:
        for i in tqdm(range(cfg.trials), desc="Trials", disable=not progress, leave=False):
            outcomes.append(run_trial(cfg, i, env))

    outcomes.sort(key=lambda o: o.index)
    successes = sum(o.success for o in outcomes)
    report = TrialReport(
        successes=successes,
        trials=cfg.trials,
        p_hat=successes / cfg.trials,
        wall_time_per_trial=float(np.mean([o.build_time + o.query_time for o in outcomes])),
        per_trial=outcomes,
    )
    logger.info(f"✓ Monte Carlo: {report}")
    return report
