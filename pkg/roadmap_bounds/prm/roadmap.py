"""
Roadmap
Probabilistic roadmaps over box-union environments with radius or K-nearest-neighbor
connection, incremental growth from a saved random-stream position, and
non-mutating shortest-path queries.
"""

import heapq
import json
import math
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

import networkx as nx
import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, TypeAdapter

from roadmap_bounds.geometry.environment import (
    Environment,
    PointLike,
    contains,
    contains_points,
    sample_uniform_batch,
    segments_free,
)
from roadmap_bounds.prm.spatial_index import GridIndex, pairwise_distances
from roadmap_bounds.utils.seeding import SeedLike, as_generator, generator_state, restore_generator


class Radius(BaseModel):
    """Connect every collision-free pair within distance r"""
    model_config = ConfigDict(frozen=True)
    kind: Literal["radius"] = "radius"
    r: float = Field(gt=0.0, description="Connection radius")


class Knn(BaseModel):
    """Connect u and v when either is among the other's K nearest and the segment is free"""
    model_config = ConfigDict(frozen=True)
    kind: Literal["knn"] = "knn"
    k: int = Field(ge=1, description="Neighbor count K")


ConnectionStrategy = Annotated[Union[Radius, Knn], Field(discriminator="kind")]
_strategy_adapter = TypeAdapter(ConnectionStrategy)


class PrmGraph(BaseModel):
    """
    Roadmap vertices, adjacency and the strategy that produced them.

    Edges carry their Euclidean length as "weight". rng_state is the position of
    the sampling stream after the last vertex, or None for roadmaps built from a
    given vertex set.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    vertices: np.ndarray
    graph: nx.Graph
    strategy: ConnectionStrategy
    rng_state: Optional[Dict[str, Any]] = None

    _index: Optional[GridIndex] = PrivateAttr(default=None)

    @property
    def dim(self) -> int:
        return int(self.vertices.shape[1])

    @property
    def size(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def index(self) -> GridIndex:
        if self._index is None:
            self._index = GridIndex(self.vertices)
        return self._index

    def edge_array(self) -> np.ndarray:
        """Edges as (m, 2) index pairs, i < j, lexicographically sorted"""
        if self.graph.number_of_edges() == 0:
            return np.empty((0, 2), dtype=np.int64)
        edges = np.array([sorted(e) for e in self.graph.edges()], dtype=np.int64)
        return edges[np.lexsort((edges[:, 1], edges[:, 0]))]

    def __str__(self) -> str:
        return f"PrmGraph({self.size} vertices, {self.graph.number_of_edges()} edges, {self.strategy})"


def _assemble(vertices: np.ndarray, edges: np.ndarray) -> nx.Graph:
    """Graph over all vertices with edges inserted in lexicographic order"""
    graph = nx.Graph()
    graph.add_nodes_from(range(len(vertices)))
    if len(edges):
        edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
        lengths = np.linalg.norm(vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1)
        graph.add_weighted_edges_from(
            (int(i), int(j), float(w)) for (i, j), w in zip(edges, lengths)
        )
    return graph


def _free_pairs(env: Environment, vertices: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    if len(pairs) == 0:
        return pairs
    free = segments_free(env, vertices[pairs[:, 0]], vertices[pairs[:, 1]])
    return pairs[free]


def _knn_candidate_pairs(index: GridIndex, k: int) -> np.ndarray:
    """Undirected union of the directed K-nearest relations"""
    neighbors, _ = index.knn_all(k)
    if neighbors.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    src = np.repeat(np.arange(index.n), neighbors.shape[1])
    dst = neighbors.reshape(-1)
    pairs = np.stack([np.minimum(src, dst), np.maximum(src, dst)], axis=1)
    return np.unique(pairs, axis=0)


def _connect(
    env: Environment,
    vertices: np.ndarray,
    strategy: Union[Radius, Knn],
    index: GridIndex,
    old_edges: Optional[np.ndarray] = None,
    n_old: int = 0,
) -> np.ndarray:
    if isinstance(strategy, Radius):
        new_edges = _free_pairs(env, vertices, index.pairs_within(strategy.r, since=n_old))
        if old_edges is not None and len(old_edges):
            return np.concatenate([old_edges, new_edges])
        return new_edges
    return _free_pairs(env, vertices, _knn_candidate_pairs(index, strategy.k))


def construct(
    env: Environment,
    n_total: int,
    strategy: Union[Radius, Knn],
    rng: SeedLike = None,
    prev: Optional[PrmGraph] = None,
) -> PrmGraph:
    """
    Grow a roadmap to exactly n_total vertices.

    Without prev, vertices are drawn from rng (a Generator or a seed). With
    prev, its vertices are kept and sampling resumes from prev.rng_state, so
    growing 500 -> 1000 yields the same roadmap as building 1000 at once.
    Radius edges among old vertices are reused; KNN adjacency is recomputed.

    Args:
        env: Free space to sample
        n_total: Target vertex count, at least 1
        strategy: Radius or Knn
        rng: Generator or seed, only without prev
        prev: Roadmap to extend

    Returns:
        New PrmGraph; prev is left unchanged

    Raises:
        ValueError: On mismatched strategy or dimension, shrinking, or a missing stream
    """
    if n_total < 1:
        raise ValueError(f"Roadmap needs n_total >= 1, got {n_total}")

    if prev is not None:
        if rng is not None:
            raise ValueError("Pass either rng or prev; a grown roadmap continues its own stream")
        if prev.strategy != strategy:
            raise ValueError(f"Strategy {strategy} does not match the saved roadmap's {prev.strategy}")
        if prev.dim != env.dim:
            raise ValueError(f"Saved roadmap has dimension {prev.dim}, environment has {env.dim}")
        if n_total < prev.size:
            raise ValueError(f"Cannot shrink a roadmap from {prev.size} to {n_total} vertices")
        generator = restore_generator(prev.rng_state)
        n_old = prev.size
        old_vertices = prev.vertices
        old_edges = prev.edge_array()
    else:
        generator = as_generator(rng)
        n_old = 0
        old_vertices = np.empty((0, env.dim))
        old_edges = None

    if prev is not None and n_total == n_old:
        return prev

    fresh = sample_uniform_batch(env, generator, n_total - n_old)
    vertices = np.vstack([old_vertices, fresh])
    index = GridIndex(vertices)
    edges = _connect(env, vertices, strategy, index, old_edges, n_old)

    roadmap = PrmGraph(
        vertices=vertices,
        graph=_assemble(vertices, edges),
        strategy=strategy,
        rng_state=generator_state(generator),
    )
    roadmap._index = index
    logger.debug(f"Constructed {roadmap} (+{n_total - n_old} samples)")
    return roadmap


def build_roadmap(env: Environment, vertices: PointLike, strategy: Union[Radius, Knn]) -> PrmGraph:
    """Roadmap over a given vertex set, e.g. a grid certified as an alpha-net"""
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != env.dim or len(verts) == 0:
        raise ValueError(f"Vertices must have shape (n >= 1, {env.dim}), got {verts.shape}")
    if not np.all(contains_points(env, verts)):
        raise ValueError("Every roadmap vertex must lie in the free space")
    index = GridIndex(verts)
    roadmap = PrmGraph(
        vertices=verts, graph=_assemble(verts, _connect(env, verts, strategy, index)), strategy=strategy
    )
    roadmap._index = index
    return roadmap


def _endpoint_links(
    roadmap: PrmGraph, env: Environment, x: np.ndarray
) -> List[Tuple[int, float]]:
    """(vertex, length) pairs joining x to the roadmap under its own strategy"""
    strategy = roadmap.strategy
    if isinstance(strategy, Radius):
        cand = roadmap.index.within(x, strategy.r)
    else:
        cand = roadmap.index.nearest(x, strategy.k)[0]
    if cand.size == 0:
        return []
    free = segments_free(env, np.repeat(x[None], cand.size, axis=0), roadmap.vertices[cand])
    cand = cand[free]
    lengths = pairwise_distances(x[None], roadmap.vertices[cand])[0]
    return [(int(v), float(w)) for v, w in zip(cand, lengths)]


def _ranks_within_k(roadmap: PrmGraph, x: np.ndarray, gap: float, k: int) -> bool:
    """Whether a point at distance gap from x is among x's K nearest"""
    _, dist = roadmap.index.nearest(x, k)
    return len(dist) < k or gap <= dist[-1]


def _direct_link(roadmap: PrmGraph, env: Environment, xs: np.ndarray, xg: np.ndarray) -> Optional[float]:
    """
    Length of the start-goal edge if the strategy would create it.

    For KNN the edge exists when either endpoint would rank the other among
    its K nearest, the same OR rule as roadmap edges.
    """
    gap = float(np.linalg.norm(xg - xs))
    strategy = roadmap.strategy
    if isinstance(strategy, Radius):
        allowed = gap <= strategy.r
    else:
        allowed = _ranks_within_k(roadmap, xs, gap, strategy.k) or _ranks_within_k(roadmap, xg, gap, strategy.k)
    if allowed and segments_free(env, xs, xg)[0]:
        return gap
    return None


def query(
    roadmap: PrmGraph, env: Environment, x_s: PointLike, x_g: PointLike
) -> Optional[List[np.ndarray]]:
    """
    Shortest collision-free path from x_s to x_g through the roadmap.

    Endpoints are joined with the roadmap's own rule (within r, or K nearest)
    in a per-query overlay; the roadmap is never modified. Dijkstra pops
    (distance, node) so equal distances resolve to the lower index.

    Returns:
        [x_s, v_1, ..., x_g] as arrays, or None when no path exists

    Raises:
        ValueError: If an endpoint lies outside the free space
    """
    xs = np.asarray(x_s, dtype=float)
    xg = np.asarray(x_g, dtype=float)
    if not contains(env, xs):
        raise ValueError(f"Start {xs.tolist()} is outside the free space")
    if not contains(env, xg):
        raise ValueError(f"Goal {xg.tolist()} is outside the free space")
    if np.array_equal(xs, xg):
        return [xs.copy()]

    n = roadmap.size
    start, goal = n, n + 1
    start_links = _endpoint_links(roadmap, env, xs)
    goal_links = dict(_endpoint_links(roadmap, env, xg))
    direct = _direct_link(roadmap, env, xs, xg)
    if direct is not None:
        start_links.append((goal, direct))
    elif not start_links or not goal_links:
        return None

    dist: Dict[int, float] = {start: 0.0}
    parent: Dict[int, int] = {}
    done = set()
    heap = [(0.0, start)]
    while heap:
        d_u, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == goal:
            break
        if u == start:
            links = start_links
        else:
            links = [(v, attrs["weight"]) for v, attrs in roadmap.graph.adj[u].items()]
            if u in goal_links:
                links.append((goal, goal_links[u]))
        for v, w in links:
            alt = d_u + w
            if alt < dist.get(v, math.inf):
                dist[v] = alt
                parent[v] = u
                heapq.heappush(heap, (alt, v))

    if goal not in done:
        return None
    nodes = [goal]
    while nodes[-1] != start:
        nodes.append(parent[nodes[-1]])
    nodes.reverse()
    path = [xs.copy()] + [roadmap.vertices[v].copy() for v in nodes[1:-1]] + [xg.copy()]
    logger.debug(f"Query path with {len(path)} points, length {dist[goal]:.4f}")
    return path


def path_length(path: List[np.ndarray]) -> float:
    return float(sum(np.linalg.norm(b - a) for a, b in zip(path, path[1:])))


def min_k1_distance(roadmap: PrmGraph, k: Optional[int] = None) -> float:
    """
    Smallest distance from any vertex to its (K+1)-th nearest other vertex.

    Any radius strictly below this value is a connection radius of the KNN
    roadmap; the value itself is not.

    Args:
        roadmap: Roadmap, normally built with Knn(K)
        k: K; defaults to the roadmap's Knn strategy

    Raises:
        ValueError: If K is unknown or the roadmap has at most K + 1 vertices
    """
    if k is None:
        if not isinstance(roadmap.strategy, Knn):
            raise ValueError("K must be given for a roadmap not built with Knn")
        k = roadmap.strategy.k
    return min_k1_distance_of_points(roadmap.vertices, k, roadmap.index)


def min_k1_distance_of_points(points: np.ndarray, k: int, index: Optional[GridIndex] = None) -> float:
    """min over points of the distance to the (k+1)-th nearest other point"""
    if len(points) <= k + 1:
        raise ValueError(f"Need more than K + 1 = {k + 1} vertices, got {len(points)}")
    index = index if index is not None else GridIndex(points)
    _, dist = index.knn_all(k + 1)
    return float(dist[:, k].min())


def to_json(roadmap: PrmGraph) -> str:
    """Serialize vertices, edges, strategy and stream position; floats round-trip exactly"""
    payload = {
        "dim": roadmap.dim,
        "vertices": roadmap.vertices.tolist(),
        "edges": roadmap.edge_array().tolist(),
        "strategy": roadmap.strategy.model_dump(),
        "rng_state": roadmap.rng_state,
    }
    return json.dumps(payload)


def from_json(text: str) -> PrmGraph:
    """Inverse of to_json"""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"Invalid roadmap JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    missing = {"dim", "vertices", "edges", "strategy"} - payload.keys()
    if missing:
        raise ValueError(f"Roadmap JSON is missing fields: {sorted(missing)}")
    vertices = np.asarray(payload["vertices"], dtype=float).reshape(-1, payload["dim"])
    edges = np.asarray(payload["edges"], dtype=np.int64).reshape(-1, 2)
    if len(edges) and (edges.min() < 0 or edges.max() >= len(vertices)):
        raise ValueError("Roadmap JSON has edges referring to unknown vertices")
    return PrmGraph(
        vertices=vertices,
        graph=_assemble(vertices, edges),
        strategy=_strategy_adapter.validate_python(payload["strategy"]),
        rng_state=payload.get("rng_state"),
    )
