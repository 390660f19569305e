#!/usr/bin/env python3
"""
Roadmap Bounds CLI
Sample bounds, KNN radius bounds, Monte Carlo roadmap experiments and sample
scheduling from the command line. Results go to stdout (or --out); logs to stderr.

Exit codes: 0 success, 2 invalid input, 3 runtime failure.
"""

import functools
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click
import numpy as np
from loguru import logger

from config import settings
from roadmap_bounds.bounds.radius_bounds import (
    RadiusQuery,
    closed_form_radius,
    default_r_max,
    numerical_radius_bound,
)
from roadmap_bounds.bounds.sample_bounds import (
    BoundQuery,
    closed_form_bound,
    numerical_sample_bound,
    samples_for_clearance,
)
from roadmap_bounds.geometry.environment import (
    Environment,
    load_environment,
    make_hallway,
    sample_uniform_batch,
    save_environment,
    volume,
)
from roadmap_bounds.harness.bound_sweep import BOUND_SWEEP_COLUMNS, gamma_values, run_bound_sweep
from roadmap_bounds.harness.monte_carlo import HallwaySpec, McConfig, mc_success_estimate
from roadmap_bounds.harness.net_check import net_check
from roadmap_bounds.harness.radius_experiment import knn_radius_empirical
from roadmap_bounds.harness.ratio_sweep import RATIO_COLUMNS, SWEEP_COLUMNS, decade_values, run_ratio_sweep
from roadmap_bounds.harness.table_runner import TABLE_COLUMNS, load_table_spec, run_table
from roadmap_bounds.prm.roadmap import Knn, Radius
from roadmap_bounds.scheduler.comparison import COMPARISON_COLUMNS, compare_strategies
from roadmap_bounds.scheduler.task_generator import TaskSpec
from roadmap_bounds.utils.logging_setup import configure_logging
from roadmap_bounds.utils.output import emit, load_spec, print_summary, to_csv, to_json
from roadmap_bounds.utils.seeding import as_generator

EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
LOG_LEVELS = ["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"]


def handle_errors(fn: Callable) -> Callable:
    """Map exceptions to exit codes: ValueError/ValidationError -> 2, anything else -> 3"""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (click.exceptions.Exit, click.exceptions.Abort, click.ClickException):
            raise
        except ValueError as e:
            # pydantic.ValidationError and json.JSONDecodeError are ValueErrors too
            logger.error(f"✗ Invalid input: {e}")
            sys.exit(EXIT_VALIDATION)
        except Exception as e:
            logger.error(f"✗ {type(e).__name__}: {e}")
            logger.debug("Traceback follows", exc_info=True)
            sys.exit(EXIT_RUNTIME)
    return wrapper


def _output(ctx: click.Context, payload: Any, rows: Optional[List[Dict[str, Any]]] = None,
            columns: Optional[tuple] = None, default: str = "json") -> None:
    fmt = ctx.obj["format"] or default
    if fmt == "csv":
        if rows is None:
            rows = [payload] if isinstance(payload, dict) else []
            columns = columns or (tuple(rows[0].keys()) if rows else ())
        emit(to_csv(rows, columns), ctx.obj["out"])
    else:
        emit(to_json(payload), ctx.obj["out"])


def _resolve_env(env_file: Optional[Path], d: Optional[int], delta: Optional[float]) -> Environment:
    if env_file is not None:
        return load_environment(env_file)
    if d is None or delta is None:
        raise ValueError("Give --env, or both --d and --delta for a hallway")
    return make_hallway(d, delta)


@click.group()
@click.option("--seed", type=click.IntRange(min=0, max=2 ** 64 - 1), default=None, help="Master seed (default from ROADMAP_DEFAULT_SEED)")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Write results here instead of stdout")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None, help="Result format")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None,
              help="Terminal log level (default from ROADMAP_LOG_LEVEL)")
@click.pass_context
def cli(ctx: click.Context, seed: Optional[int], out: Optional[Path], fmt: Optional[str], log_level: Optional[str]):
    """Finite-sample bounds and experiments for probabilistic roadmaps."""
    configure_logging(level=log_level)
    ctx.ensure_object(dict)
    ctx.obj.update(seed=seed if seed is not None else settings.default_seed, out=out, format=fmt)


@cli.command()
@click.option("--p", "p", type=float, default=None, help="Ball measure P(B_alpha)")
@click.option("--dim", type=int, default=None, help="Dimension d")
@click.option("--gamma", type=float, required=True, help="Failure probability")
@click.option("--env", "env_file", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--d", type=int, default=None, help="Hallway dimension (with --delta)")
@click.option("--delta", type=float, default=None, help="Path clearance")
@click.option("--method", type=click.Choice(["numerical", "closed_form"]), default="numerical")
@click.option("--trace/--no-trace", default=False, help="Include the search trace")
@click.pass_context
@handle_errors
def bound(ctx, p, dim, gamma, env_file, d, delta, method, trace):
    """Samples sufficient for an alpha-net, from (p, dim) or (environment, delta)."""
    alpha = None
    if p is not None:
        if dim is None:
            raise ValueError("--p needs --dim")
        query = BoundQuery(dim=dim, ball_measure=p, gamma=gamma)
        result = numerical_sample_bound(query) if method == "numerical" else closed_form_bound(query)
    else:
        if delta is None:
            raise ValueError("Give --p and --dim, or --delta with --env or --d")
        env = _resolve_env(env_file, d, delta)
        result = samples_for_clearance(env.dim, delta, gamma, volume(env))
        alpha = result.alpha
        if method == "closed_form" and not result.fully_covered:
            result = closed_form_bound(BoundQuery(dim=env.dim, ball_measure=result.ball_measure, gamma=gamma))
            result = result.model_copy(update={"alpha": alpha})

    payload = {
        "samples": result.samples,
        "log_failure": result.log_failure_at_n,
        "method": result.method,
        "p": result.ball_measure,
        "alpha": alpha,
        "fully_covered": result.fully_covered,
        "evaluations": result.evaluations,
    }
    if trace and result.search_trace is not None:
        payload["search_trace"] = result.search_trace
    logger.info(f"✓ {result}")
    _output(ctx, payload)


@cli.command("bound-sweep")
@click.option("--dim", "dims", type=int, multiple=True, help="Dimension; repeat for several (default 2)")
@click.option("--alpha", type=float, default=0.5, help="Net radius")
@click.option("--free-volume", type=float, default=1.0)
@click.option("--gamma", "gammas", type=float, multiple=True, help="Failure probability; repeat (default 1e-1..1e-8)")
@click.option("--per-decade", type=int, default=2, help="Grid points per decade of the default gamma range")
@click.pass_context
@handle_errors
def bound_sweep(ctx, dims, alpha, free_volume, gammas, per_decade):
    """Numerical, closed-form and asymptotic sample bounds across gamma."""
    rows = run_bound_sweep(list(dims) or [2], list(gammas) or gamma_values(1, 8, per_decade),
                           alpha=alpha, free_volume=free_volume)
    print_summary("Bound sweep", rows, BOUND_SWEEP_COLUMNS)
    _output(ctx, rows, rows, BOUND_SWEEP_COLUMNS, default="csv")


@cli.command("knn-radius")
@click.option("--k", type=int, default=None, help="Neighbor count K (default ROADMAP_KNN_K)")
@click.option("--n", type=int, required=True, help="Sample count")
@click.option("--gamma", type=float, required=True)
@click.option("--dim", type=int, default=None)
@click.option("--free-volume", type=float, default=None)
@click.option("--env", "env_file", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--r-max", type=float, default=None, help="Search ceiling (default: half the shortest side of the smallest box)")
@click.option("--eps", type=float, default=None)
@click.option("--method", type=click.Choice(["numerical", "closed_form"]), default="numerical")
@click.pass_context
@handle_errors
def knn_radius(ctx, k, n, gamma, dim, free_volume, env_file, r_max, eps, method):
    """Effective connection radius of a KNN roadmap."""
    if env_file is not None:
        env = load_environment(env_file)
        dim, free_volume = env.dim, volume(env)
        r_max = r_max if r_max is not None else default_r_max(env)
    if dim is None:
        raise ValueError("Give --dim (and optionally --free-volume) or --env")
    free_volume = free_volume if free_volume is not None else 1.0
    r_max = r_max if r_max is not None else 0.5
    query = RadiusQuery(
        k=k or settings.knn_k, n=n, gamma=gamma, dim=dim, free_volume=free_volume, r_max=r_max,
        eps=eps if eps is not None else settings.radius_eps,
    )
    result = numerical_radius_bound(query) if method == "numerical" else closed_form_radius(query)
    if result.radius is None:
        logger.warning("No connection radius certified at these parameters")
    logger.info(f"✓ {result}")
    _output(ctx, result.model_dump())


@cli.command()
@click.option("--k", type=int, default=256)
@click.option("--gamma", type=float, default=0.1)
@click.option("--dim", "dims", type=int, multiple=True, help="Dimension; repeat for several")
@click.option("--n", "n_values", type=int, multiple=True, help="Sample count; repeat (default 1e3..1e6 by decade)")
@click.option("--free-volume", type=float, default=1.0)
@click.pass_context
@handle_errors
def ratio(ctx, k, gamma, dims, n_values, free_volume):
    """Connection radius over four times the net radius, per sample count."""
    dims = list(dims) or [2]
    n_values = list(n_values) or decade_values(3, 6)
    rows = run_ratio_sweep(k, gamma, dims, n_values, free_volume=free_volume)
    columns = RATIO_COLUMNS if len(dims) == 1 else SWEEP_COLUMNS
    print_summary("Radius ratio", rows, SWEEP_COLUMNS)
    _output(ctx, rows, rows, columns, default="csv")


@cli.command()
@click.option("--d", type=int, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--env", "env_file", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--n", "n_samples", type=int, required=True, help="Roadmap size")
@click.option("--k", type=int, default=None, help="KNN roadmap with K neighbors (default)")
@click.option("--radius", type=float, default=None, help="Radius roadmap instead of KNN")
@click.option("--trials", type=int, default=100)
@click.option("--workers", type=int, default=None)
@click.pass_context
@handle_errors
def mc(ctx, d, delta, env_file, n_samples, k, radius, trials, workers):
    """Monte Carlo success probability of the hallway query."""
    if radius is not None and k is not None:
        raise ValueError("Choose either --k or --radius")
    strategy = Radius(r=radius) if radius is not None else Knn(k=k or settings.knn_k)
    if env_file is not None:
        cfg = McConfig(env_file=env_file, n_samples=n_samples, strategy=strategy, trials=trials,
                       master_seed=ctx.obj["seed"])
    else:
        if d is None or delta is None:
            raise ValueError("Give --env, or both --d and --delta")
        cfg = McConfig(hallway=HallwaySpec(d=d, delta=delta), n_samples=n_samples, strategy=strategy,
                       trials=trials, master_seed=ctx.obj["seed"])
    report = mc_success_estimate(cfg, workers=workers)
    per_trial = [o.model_dump() for o in report.per_trial]
    summary = report.model_dump(exclude={"per_trial"})
    print_summary("Monte Carlo", [summary])
    _output(ctx, {**summary, "per_trial": per_trial}, per_trial,
            ("index", "seed", "success", "build_time", "query_time"))


@cli.command("net-check")
@click.option("--alpha", type=float, required=True)
@click.option("--samples", "samples_file", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None,
              help="JSON list of sample points")
@click.option("--uniform", type=int, default=None, help="Draw this many uniform samples instead")
@click.option("--pitch", type=float, default=None, help="Grid pitch (default alpha * ROADMAP_NET_CHECK_PITCH_FRACTION)")
@click.option("--d", type=int, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--env", "env_file", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.pass_context
@handle_errors
def net_check_cmd(ctx, alpha, samples_file, uniform, pitch, d, delta, env_file):
    """Grid certificate that a sample set is an alpha-net."""
    env = _resolve_env(env_file, d, delta)
    if (samples_file is None) == (uniform is None):
        raise ValueError("Give exactly one of --samples or --uniform")
    if samples_file is not None:
        try:
            samples = np.asarray(json.loads(samples_file.read_text()), dtype=float)
        except json.JSONDecodeError as e:
            raise ValueError(f"{samples_file}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    else:
        samples = sample_uniform_batch(env, as_generator(ctx.obj["seed"]), uniform)
    passed = net_check(samples, env, alpha, pitch)
    logger.info(f"{'✓' if passed else '✗'} Net check with {len(samples)} samples at alpha={alpha}: {passed}")
    _output(ctx, {"passed": passed, "alpha": alpha, "samples": int(len(samples)), "pitch": pitch})


@cli.command("radius-experiment")
@click.option("--d", type=int, default=2)
@click.option("--k", type=int, default=16)
@click.option("--n", type=int, default=10_000)
@click.option("--trials", type=int, default=100)
@click.option("--gamma", type=float, default=0.01)
@click.pass_context
@handle_errors
def radius_experiment(ctx, d, k, n, trials, gamma):
    """Empirical (K+1)-NN distances in the unit cube against the radius bounds."""
    report = knn_radius_empirical(d, k, n, trials, ctx.obj["seed"], gamma=gamma)
    rows = [{"trial": i, "min_distance": v} for i, v in enumerate(report.min_distances)]
    print_summary("Radius experiment", [report.model_dump(exclude={"min_distances"})])
    _output(ctx, report.model_dump(), rows, ("trial", "min_distance"))


@cli.command()
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.pass_context
@handle_errors
def table(ctx, spec_file):
    """Bound and Monte Carlo grid from a JSON table spec."""
    spec = load_table_spec(spec_file)
    rows = run_table(spec)
    print_summary("Table", rows, TABLE_COLUMNS)
    _output(ctx, rows, rows, TABLE_COLUMNS, default="csv")


@cli.command()
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--workers", type=int, default=None)
@click.pass_context
@handle_errors
def schedule(ctx, spec_file, workers):
    """Compare aPRM / sPRM / iPRM on a seeded task family."""
    spec = load_spec(spec_file, TaskSpec)
    report = compare_strategies(spec, workers=workers)
    print_summary("Strategies", [a.model_dump() for a in report.aggregates])
    rows = [r.model_dump() for r in report.rows]
    _output(ctx, report.model_dump(), rows, COMPARISON_COLUMNS, default="csv")


@cli.command()
@click.option("--d", type=int, required=True)
@click.option("--delta", type=float, required=True)
@click.pass_context
@handle_errors
def hallway(ctx, d, delta):
    """Write the narrow-hallway environment as JSON."""
    env = make_hallway(d, delta)
    if ctx.obj["out"] is not None:
        save_environment(env, ctx.obj["out"])
        logger.info(f"✓ Hallway d={d}, delta={delta} written to {ctx.obj['out']}")
    else:
        emit(env.model_dump_json(indent=2) + "\n")


if __name__ == "__main__":
    sys.exit(cli(obj={}))
