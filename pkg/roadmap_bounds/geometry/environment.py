"""
Environment
Collision-free configuration spaces represented as unions of axis-aligned boxes.
Provides membership, exact segment collision checking, uniform sampling and volumes.
"""

import json
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

# Parameter-space tolerance used when merging clipped intervals along a segment.
SEGMENT_TOLERANCE = 1e-9

PointLike = Union[Sequence[float], np.ndarray]


class Box(BaseModel):
    """Closed axis-aligned box [lo, hi] in configuration-space units"""
    model_config = ConfigDict(frozen=True)

    lo: Tuple[float, ...] = Field(description="Lower corner")
    hi: Tuple[float, ...] = Field(description="Upper corner")

    @model_validator(mode="after")
    def check_extent(self) -> "Box":
        if len(self.lo) == 0:
            raise ValueError("Box must have dimension >= 1")
        if len(self.lo) != len(self.hi):
            raise ValueError(f"Box corners disagree on dimension: lo has {len(self.lo)}, hi has {len(self.hi)}")
        if not (np.all(np.isfinite(self.lo)) and np.all(np.isfinite(self.hi))):
            raise ValueError(f"Box corners must be finite: lo={self.lo}, hi={self.hi}")
        for axis, (a, b) in enumerate(zip(self.lo, self.hi)):
            if not a < b:
                raise ValueError(f"Box needs lo < hi on every axis; axis {axis} has lo={a}, hi={b}")
        return self

    @property
    def dim(self) -> int:
        return len(self.lo)

    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def shortest_side(self) -> float:
        return float(np.min(np.subtract(self.hi, self.lo)))


class Environment(BaseModel):
    """
    Free configuration space X_free as an ordered union of boxes.

    Box interiors must be pairwise disjoint; shared boundary faces are allowed
    and count as inside. Instances are immutable and safe to share.
    """
    model_config = ConfigDict(frozen=True)

    dim: int = Field(ge=1, description="Ambient dimension d")
    boxes: Tuple[Box, ...] = Field(min_length=1, description="Boxes whose union is the free space")

    _lo: np.ndarray = PrivateAttr()
    _hi: np.ndarray = PrivateAttr()
    _volumes: np.ndarray = PrivateAttr()
    _cumulative: np.ndarray = PrivateAttr()

    @model_validator(mode="after")
    def check_boxes(self) -> "Environment":
        for i, box in enumerate(self.boxes):
            if box.dim != self.dim:
                raise ValueError(f"Box {i} has dimension {box.dim}, environment has {self.dim}")

        lo = np.array([b.lo for b in self.boxes], dtype=float)
        hi = np.array([b.hi for b in self.boxes], dtype=float)
        for i in range(len(self.boxes)):
            overlap = np.minimum(hi[i], hi[i + 1:]) - np.maximum(lo[i], lo[i + 1:])
            clashing = np.nonzero(np.all(overlap > 0.0, axis=1))[0]
            if clashing.size:
                j = i + 1 + int(clashing[0])
                raise ValueError(f"Boxes {i} and {j} have overlapping interiors")
        return self

    def model_post_init(self, __context) -> None:
        self._lo = np.array([b.lo for b in self.boxes], dtype=float)
        self._hi = np.array([b.hi for b in self.boxes], dtype=float)
        self._volumes = np.prod(self._hi - self._lo, axis=1)
        self._cumulative = np.cumsum(self._volumes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Environment):
            return NotImplemented
        return self.dim == other.dim and self.boxes == other.boxes

    def __hash__(self) -> int:
        return hash((self.dim, self.boxes))

    @property
    def cumulative_volumes(self) -> Tuple[float, ...]:
        """Prefix sums of box volumes, in box order"""
        return tuple(float(v) for v in self._cumulative)

    def bounding_box(self) -> Box:
        return Box(lo=tuple(self._lo.min(axis=0)), hi=tuple(self._hi.max(axis=0)))

    def smallest_box(self) -> Box:
        return self.boxes[int(np.argmin(self._volumes))]


def as_points(env: Environment, points: PointLike, name: str = "point") -> np.ndarray:
    """Coerce to a (m, d) float array and check the dimension against env"""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != env.dim:
        raise ValueError(
            f"{name} has dimension {arr.shape[-1] if arr.ndim else 0}, environment has dimension {env.dim}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite coordinates")
    return arr


def make_hallway(d: int, delta: float) -> Environment:
    """
    Build the narrow-hallway environment.

    Two unit end rooms joined by a hallway of half-width delta:
    left end [-1.5,-0.5]x[-0.5,0.5]^(d-1), right end [0.5,1.5]x[-0.5,0.5]^(d-1),
    hallway [-0.5,0.5]x[-delta,delta]^(d-1).

    Args:
        d: Dimension, at least 2
        delta: Hallway half-width in (0, 0.5)

    Returns:
        Environment with boxes ordered (left end, right end, hallway)

    Raises:
        ValueError: If d < 2 or delta is outside (0, 0.5)
    """
    if int(d) != d or d < 2:
        raise ValueError(f"Hallway dimension must be an integer >= 2, got {d}")
    if not 0.0 < delta < 0.5:
        raise ValueError(f"Hallway half-width must lie in (0, 0.5), got {delta}")
    d = int(d)
    side = (0.5,) * (d - 1)
    boxes = (
        Box(lo=(-1.5,) + tuple(-s for s in side), hi=(-0.5,) + side),
        Box(lo=(0.5,) + tuple(-s for s in side), hi=(1.5,) + side),
        Box(lo=(-0.5,) + (-delta,) * (d - 1), hi=(0.5,) + (delta,) * (d - 1)),
    )
    logger.debug(f"Built hallway d={d}, delta={delta}")
    return Environment(dim=d, boxes=boxes)


def contains_points(env: Environment, points: PointLike) -> np.ndarray:
    """Vectorized membership in the closed box union; returns a boolean array"""
    pts = as_points(env, points)
    inside = (pts[:, None, :] >= env._lo[None]) & (pts[:, None, :] <= env._hi[None])
    return np.any(np.all(inside, axis=2), axis=1)


def contains(env: Environment, p: PointLike) -> bool:
    """True iff p lies in the closed union of boxes"""
    return bool(contains_points(env, p)[0])


def _clip_parameters(env: Environment, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Slab-clip every segment against every box.

    Returns (t_lo, t_hi), each of shape (segments, boxes). Empty intervals are
    encoded as (inf, -inf).
    """
    direction = (b - a)[:, None, :]
    start = a[:, None, :]
    lo = env._lo[None]
    hi = env._hi[None]

    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (lo - start) / direction
        t2 = (hi - start) / direction
    t_near = np.minimum(t1, t2)
    t_far = np.maximum(t1, t2)

    # Axes the segment does not move along: all-or-nothing per slab.
    parallel = direction == 0.0
    in_slab = (start >= lo) & (start <= hi)
    t_near = np.where(parallel, np.where(in_slab, -np.inf, np.inf), t_near)
    t_far = np.where(parallel, np.where(in_slab, np.inf, -np.inf), t_far)

    t_lo = np.maximum(t_near.max(axis=2), 0.0)
    t_hi = np.minimum(t_far.min(axis=2), 1.0)
    empty = t_lo > t_hi
    t_lo[empty] = np.inf
    t_hi[empty] = -np.inf
    return t_lo, t_hi


def clip_intervals(env: Environment, a: PointLike, b: PointLike) -> List[Tuple[float, float]]:
    """
    Parameter intervals [t_lo, t_hi] of the segment a->b lying inside each box.

    Only non-empty intervals are returned, in box order.
    """
    pa = as_points(env, a, "a")
    pb = as_points(env, b, "b")
    t_lo, t_hi = _clip_parameters(env, pa, pb)
    return [(float(lo), float(hi)) for lo, hi in zip(t_lo[0], t_hi[0]) if lo <= hi]


def segments_free(env: Environment, starts: PointLike, ends: PointLike) -> np.ndarray:
    """
    Exact collision check for many segments at once.

    A segment is free iff the union of its clipped parameter intervals covers
    [0, 1], merging intervals with absolute tolerance SEGMENT_TOLERANCE.

    Args:
        env: Environment to check against
        starts: (m, d) segment start points
        ends: (m, d) segment end points

    Returns:
        Boolean array of length m
    """
    a = as_points(env, starts, "starts")
    b = as_points(env, ends, "ends")
    if a.shape != b.shape:
        raise ValueError(f"starts and ends disagree in shape: {a.shape} vs {b.shape}")

    t_lo, t_hi = _clip_parameters(env, a, b)
    order = np.argsort(t_lo, axis=1, kind="stable")
    lo_sorted = np.take_along_axis(t_lo, order, axis=1)
    hi_sorted = np.take_along_axis(t_hi, order, axis=1)

    reach = np.zeros(a.shape[0])
    covered = np.ones(a.shape[0], dtype=bool)
    for j in range(lo_sorted.shape[1]):
        gap = (lo_sorted[:, j] > reach + SEGMENT_TOLERANCE) & (reach < 1.0 - SEGMENT_TOLERANCE)
        covered &= ~gap
        reach = np.maximum(reach, hi_sorted[:, j])
    return covered & (reach >= 1.0 - SEGMENT_TOLERANCE)


def segment_free(env: Environment, a: PointLike, b: PointLike) -> bool:
    """True iff every point of the closed segment a->b lies in the box union"""
    return bool(segments_free(env, a, b)[0])


def sample_uniform_batch(env: Environment, rng: np.random.Generator, n: int) -> np.ndarray:
    """
    Draw n points uniformly over the box union.

    Each point consumes d + 1 uniforms from rng in order (one to pick a box by
    volume, d for its coordinates), so drawing 500 then 500 points yields the
    same stream as drawing 1000 at once.
    """
    if n < 0:
        raise ValueError(f"Sample count must be non-negative, got {n}")
    u = rng.random((n, env.dim + 1))
    total = env._cumulative[-1]
    idx = np.searchsorted(env._cumulative, u[:, 0] * total, side="right")
    idx = np.minimum(idx, len(env.boxes) - 1)
    lo = env._lo[idx]
    return lo + u[:, 1:] * (env._hi[idx] - lo)


def sample_uniform(env: Environment, rng: np.random.Generator) -> np.ndarray:
    """Draw one point uniformly over the box union"""
    return sample_uniform_batch(env, rng, 1)[0]


def volume(env: Environment) -> float:
    """Exact volume of the free space (box interiors are disjoint)"""
    return float(env._cumulative[-1])


def volume_mc(env: Environment, bounding_box: Box, n: int, rng: np.random.Generator) -> float:
    """
    Monte Carlo estimate of the free-space volume.

    Args:
        env: Environment to measure
        bounding_box: Box containing every box of env
        n: Number of samples drawn uniformly in bounding_box
        rng: Random stream

    Returns:
        (hits / n) * volume(bounding_box)

    Raises:
        ValueError: If n < 1 or bounding_box does not contain env
    """
    if n < 1:
        raise ValueError(f"Monte Carlo volume needs n >= 1, got {n}")
    if bounding_box.dim != env.dim:
        raise ValueError(f"Bounding box has dimension {bounding_box.dim}, environment has {env.dim}")
    bb_lo = np.asarray(bounding_box.lo)
    bb_hi = np.asarray(bounding_box.hi)
    if np.any(env._lo < bb_lo) or np.any(env._hi > bb_hi):
        raise ValueError("Bounding box does not contain the environment")

    pts = bb_lo + rng.random((n, env.dim)) * (bb_hi - bb_lo)
    hits = int(np.count_nonzero(contains_points(env, pts)))
    estimate = hits / n * bounding_box.volume()
    logger.debug(f"Monte Carlo volume: {hits}/{n} hits -> {estimate:.6g}")
    return estimate


def load_environment(path: Union[str, Path]) -> Environment:
    """
    Load an environment from JSON {"dim": d, "boxes": [{"lo": [...], "hi": [...]}, ...]}

    Raises:
        ValueError: If the file is not valid JSON (message carries line/column)
        pydantic.ValidationError: If the content violates an Environment invariant
    """
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    return Environment.model_validate(data)


def save_environment(env: Environment, path: Union[str, Path]) -> Path:
    """Write env as JSON and return the path"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(env.model_dump_json(indent=2))
    logger.debug(f"Environment written to {path}")
    return path
