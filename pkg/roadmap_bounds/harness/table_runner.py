"""
Table Runner
Batch driver over (delta, d, n) grids of hallway experiments: sample bound per
cell plus an optional Monte Carlo success estimate, written as CSV.
"""

import itertools
import time
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from loguru import logger
from pydantic import BaseModel, Field, model_validator

from config import settings
from roadmap_bounds.bounds.sample_bounds import samples_for_clearance
from roadmap_bounds.geometry.environment import make_hallway, volume
from roadmap_bounds.harness.monte_carlo import HallwaySpec, McConfig, mc_success_estimate
from roadmap_bounds.prm.roadmap import Knn, Radius
from roadmap_bounds.utils.output import load_spec

TABLE_COLUMNS = ("delta", "d", "n", "strategy", "p_hat", "bound_samples", "seconds")


class TableCell(BaseModel):
    delta: float = Field(gt=0.0, lt=0.5)
    d: int = Field(ge=2)
    n: Optional[int] = Field(default=None, ge=1, description="Roadmap size for the Monte Carlo estimate")


class TableGrid(BaseModel):
    """Cartesian product, iterated delta-major then d then n"""
    deltas: List[float] = Field(default_factory=list)
    dims: List[int] = Field(default_factory=list)
    n_values: List[int] = Field(default_factory=list)


class TableSpec(BaseModel):
    """JSON table spec; explicit cells run before the grid"""
    gamma: float = Field(default=0.01, gt=0.0, lt=1.0)
    strategy: Literal["knn", "radius"] = "knn"
    k: int = Field(default_factory=lambda: settings.knn_k, ge=1)
    radius: Optional[float] = Field(default=None, gt=0.0, description="Radius-PRM radius; default 2 * delta")
    trials: int = Field(default=100, ge=1)
    master_seed: int = Field(default=0, ge=0)
    monte_carlo: bool = True
    timing: bool = True
    cells: List[TableCell] = Field(default_factory=list)
    grid: Optional[TableGrid] = None

    @model_validator(mode="after")
    def check_sizes(self) -> "TableSpec":
        if self.monte_carlo:
            for i, cell in enumerate(self.cells):
                if cell.n is None:
                    raise ValueError(f"cells.{i}.n is required when monte_carlo is true")
            if self.grid is not None and self.grid.deltas and self.grid.dims and not self.grid.n_values:
                raise ValueError("grid.n_values is required when monte_carlo is true")
        return self

    def expand(self) -> List[TableCell]:
        cells = list(self.cells)
        if self.grid is not None:
            n_values: List[Optional[int]] = list(self.grid.n_values) or [None]
            for delta, d, n in itertools.product(self.grid.deltas, self.grid.dims, n_values):
                cells.append(TableCell(delta=delta, d=d, n=n))
        return cells


def load_table_spec(path: Union[str, Path]) -> TableSpec:
    return load_spec(path, TableSpec)


def run_cell(spec: TableSpec, cell: TableCell) -> Dict[str, object]:
    """Bound and (optionally) Monte Carlo estimate for one cell"""
    started = time.perf_counter()
    env = make_hallway(cell.d, cell.delta)
    bound = samples_for_clearance(cell.d, cell.delta, spec.gamma, volume(env))

    p_hat = None
    if spec.monte_carlo:
        if spec.strategy == "knn":
            strategy = Knn(k=spec.k)
        else:
            strategy = Radius(r=spec.radius if spec.radius is not None else 2.0 * cell.delta)
        cfg = McConfig(
            hallway=HallwaySpec(d=cell.d, delta=cell.delta),
            n_samples=cell.n,
            strategy=strategy,
            trials=spec.trials,
            master_seed=spec.master_seed,
        )
        p_hat = mc_success_estimate(cfg).p_hat

    seconds = time.perf_counter() - started if spec.timing else 0.0
    return {
        "delta": cell.delta,
        "d": cell.d,
        "n": cell.n,
        "strategy": spec.strategy,
        "p_hat": p_hat,
        "bound_samples": bound.samples,
        "seconds": seconds,
    }


def run_table(spec: TableSpec) -> List[Dict[str, object]]:
    """
    One row per cell with columns delta, d, n, strategy, p_hat, bound_samples, seconds.

    An empty grid yields no rows. With timing off the seconds column is 0, so
    reruns produce byte-identical CSV.
    """
    cells = spec.expand()
    logger.info(f"Running table: {len(cells)} cells, monte_carlo={spec.monte_carlo}")
    rows = []
    for i, cell in enumerate(cells, start=1):
        row = run_cell(spec, cell)
        logger.info(
            f"  [{i}/{len(cells)}] delta={cell.delta}, d={cell.d}, n={cell.n}: "
            f"bound {row['bound_samples']}, p_hat {row['p_hat']}"
        )
        rows.append(row)
    logger.info(f"✓ Table complete: {len(rows)} rows")
    return rows
