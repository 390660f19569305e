"""
Spatial Index
Exact Euclidean nearest-neighbor and range search over a fixed point set.
A uniform grid sized to the expected point spacing; brute force for small sets.
Ties in distance are always broken by the lower point index.
"""

import math
from typing import Optional, Tuple

import numpy as np
from loguru import logger

from config import settings


def pairwise_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix between the rows of a and b"""
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


class GridIndex:
    """
    Immutable exact search structure over points of shape (n, d).

    Occupied cells are kept as an array of integer keys; a query inspects the
    cells within Chebyshev distance R of its own cell, which contain every point
    closer than R * cell_size.
    """

    def __init__(
        self,
        points: np.ndarray,
        points_per_cell: Optional[float] = None,
        brute_force_below: Optional[int] = None,
    ):
        self.points = np.ascontiguousarray(points, dtype=float)
        if self.points.ndim != 2:
            raise ValueError(f"Points must have shape (n, d), got {self.points.shape}")
        self.n, self.dim = self.points.shape
        per_cell = points_per_cell if points_per_cell is not None else settings.points_per_cell
        threshold = brute_force_below if brute_force_below is not None else settings.brute_force_below
        self.brute_force = self.n < threshold

        if self.brute_force:
            self.cell_size = math.inf
            return

        self.origin = self.points.min(axis=0)
        extent = self.points.max(axis=0) - self.origin
        longest = float(extent.max())
        if longest == 0.0:
            self.cell_size = 1.0
        else:
            spread = float(np.prod(np.maximum(extent, longest * 1e-12)))
            self.cell_size = max(
                (spread * per_cell / self.n) ** (1.0 / self.dim),
                longest * per_cell / self.n,
            )

        keys = np.floor((self.points - self.origin) / self.cell_size).astype(np.int64)
        self.cell_keys, cell_of_point = np.unique(keys, axis=0, return_inverse=True)
        cell_of_point = cell_of_point.reshape(-1)
        # Stable sort keeps members of each cell in index order.
        self._members = np.argsort(cell_of_point, kind="stable")
        counts = np.bincount(cell_of_point, minlength=len(self.cell_keys))
        self._starts = np.concatenate(([0], np.cumsum(counts)))
        logger.debug(
            f"Grid index: {self.n} points, {len(self.cell_keys)} cells, cell size {self.cell_size:.4g}"
        )

    # ------------------------------------------------------------------ cells

    def _key(self, p: np.ndarray) -> np.ndarray:
        return np.floor((p - self.origin) / self.cell_size).astype(np.int64)

    def _cell_members(self, cell: int) -> np.ndarray:
        return self._members[self._starts[cell]:self._starts[cell + 1]]

    def _ring_span(self, key: np.ndarray) -> int:
        """Chebyshev ring that covers every occupied cell from key"""
        return int(np.abs(self.cell_keys - key).max())

    def _candidates(self, key: np.ndarray, ring: int) -> np.ndarray:
        """Indices of points in cells within Chebyshev distance ring, sorted ascending"""
        near = np.nonzero(np.all(np.abs(self.cell_keys - key) <= ring, axis=1))[0]
        if near.size == 0:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate([self._cell_members(c) for c in near]))

    # ---------------------------------------------------------------- queries

    def nearest(self, p: np.ndarray, k: int, exclude: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Exact k nearest points to p, ordered by (distance, index).

        Args:
            p: Query point
            k: Number of neighbors; clipped to the available points
            exclude: Point index to leave out (the query vertex itself)

        Returns:
            (indices, distances)
        """
        p = np.asarray(p, dtype=float)
        available = self.n - (1 if exclude is not None else 0)
        k = min(k, available)
        if k <= 0:
            return np.empty(0, dtype=np.int64), np.empty(0)

        if self.brute_force:
            cand = np.arange(self.n)
            ring_radius = math.inf
        else:
            key = self._key(p)
            span = self._ring_span(key)
            ring = 1
            while True:
                ring = min(ring, span)
                cand = self._candidates(key, ring)
                if exclude is not None:
                    cand = cand[cand != exclude]
                ring_radius = ring * self.cell_size if ring < span else math.inf
                if cand.size >= k:
                    dist = pairwise_distances(p[None], self.points[cand])[0]
                    kth = np.partition(dist, k - 1)[k - 1]
                    if kth <= ring_radius:
                        break
                if ring >= span:
                    break
                ring *= 2

        if exclude is not None and self.brute_force:
            cand = cand[cand != exclude]
        dist = pairwise_distances(p[None], self.points[cand])[0]
        order = np.argsort(dist, kind="stable")[:k]
        return cand[order], dist[order]

    def within(self, p: np.ndarray, r: float) -> np.ndarray:
        """Indices of points with distance <= r from p, ascending"""
        if r < 0.0:
            raise ValueError(f"Radius must be non-negative, got {r}")
        p = np.asarray(p, dtype=float)
        if self.brute_force:
            cand = np.arange(self.n)
        else:
            cand = self._candidates(self._key(p), int(math.ceil(r / self.cell_size)))
        if cand.size == 0:
            return cand
        dist = pairwise_distances(p[None], self.points[cand])[0]
        return cand[dist <= r]

    # ------------------------------------------------------------ bulk queries

    def nearest_many(self, queries: np.ndarray, chunk: int = 2048) -> Tuple[np.ndarray, np.ndarray]:
        """
        Nearest indexed point of every query row.

        Returns:
            (indices, distances), each of length len(queries)
        """
        queries = np.asarray(queries, dtype=float)
        best_idx = np.zeros(len(queries), dtype=np.int64)
        best_dist = np.full(len(queries), math.inf)
        if self.n == 0 or len(queries) == 0:
            return best_idx, best_dist

        if self.brute_force:
            everything = np.arange(self.n)
            for start in range(0, len(queries), chunk):
                block = slice(start, start + chunk)
                dist = pairwise_distances(queries[block], self.points)
                best_idx[block], best_dist[block] = self._closest(dist, everything)
            return best_idx, best_dist

        keys = self._key(queries)
        unique_keys, group_of = np.unique(keys, axis=0, return_inverse=True)
        group_of = group_of.reshape(-1)
        order = np.argsort(group_of, kind="stable")
        bounds = np.concatenate(([0], np.cumsum(np.bincount(group_of, minlength=len(unique_keys)))))
        for g, key in enumerate(unique_keys):
            rows = order[bounds[g]:bounds[g + 1]]
            span = self._ring_span(key)
            ring = 1
            while True:
                ring = min(ring, span)
                cand = self._candidates(key, ring)
                if cand.size:
                    dist = pairwise_distances(queries[rows], self.points[cand])
                    idx, near = self._closest(dist, cand)
                    if ring >= span or np.all(near <= ring * self.cell_size):
                        best_idx[rows], best_dist[rows] = idx, near
                        break
                ring *= 2
        return best_idx, best_dist

    @staticmethod
    def _closest(dist: np.ndarray, cand: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        # argmin returns the first minimum, i.e. the lowest candidate index.
        col = np.argmin(dist, axis=1)
        return cand[col], dist[np.arange(len(col)), col]

    def knn_all(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        k nearest other points of every point.

        Returns:
            (neighbors, distances), both of shape (n, min(k, n - 1)), rows ordered
            by (distance, index)
        """
        k = min(k, self.n - 1)
        neighbors = np.zeros((self.n, max(k, 0)), dtype=np.int64)
        distances = np.zeros((self.n, max(k, 0)))
        if k <= 0:
            return neighbors, distances

        if self.brute_force:
            groups = [(np.arange(self.n), np.arange(self.n), math.inf)]
        else:
            groups = (self._cell_group(c, k) for c in range(len(self.cell_keys)))

        for members, cand, _ in groups:
            dist = pairwise_distances(self.points[members], self.points[cand])
            # The point itself sorts first and is then dropped.
            dist[members[:, None] == cand[None, :]] = -1.0
            order = np.argsort(dist, axis=1, kind="stable")[:, 1:k + 1]
            neighbors[members] = cand[order]
            distances[members] = np.take_along_axis(dist, order, axis=1)
        return neighbors, distances

    def _cell_group(self, cell: int, k: int) -> Tuple[np.ndarray, np.ndarray, float]:
        """Members of a cell and a candidate set guaranteed to hold all their k nearest"""
        members = self._cell_members(cell)
        key = self.cell_keys[cell]
        span = self._ring_span(key)
        ring = 1
        while True:
            ring = min(ring, span)
            cand = self._candidates(key, ring)
            if ring >= span:
                return members, cand, math.inf
            if cand.size > k:
                dist = pairwise_distances(self.points[members], self.points[cand])
                kth = np.partition(dist, k, axis=1)[:, k]
                if np.all(kth <= ring * self.cell_size):
                    return members, cand, ring * self.cell_size
            ring *= 2

    def pairs_within(self, r: float, since: int = 0) -> np.ndarray:
        """
        All index pairs (i, j), i < j, j >= since, at distance <= r.

        Returns:
            Array of shape (m, 2) in lexicographic order
        """
        if r < 0.0:
            raise ValueError(f"Radius must be non-negative, got {r}")
        chunks = []
        if self.brute_force:
            groups = [(np.arange(since, self.n), np.arange(self.n))]
        else:
            ring = int(math.ceil(r / self.cell_size))
            groups = []
            for c in range(len(self.cell_keys)):
                members = self._cell_members(c)
                members = members[members >= since]
                if members.size:
                    groups.append((members, self._candidates(self.cell_keys[c], ring)))

        for members, cand in groups:
            if members.size == 0 or cand.size == 0:
                continue
            dist = pairwise_distances(self.points[members], self.points[cand])
            keep = (dist <= r) & (cand[None, :] < members[:, None])
            j_idx, i_idx = np.nonzero(keep)
            chunks.append(np.stack([cand[i_idx], members[j_idx]], axis=1))

        if not chunks:
            return np.empty((0, 2), dtype=np.int64)
        pairs = np.concatenate(chunks)
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        return pairs[order]


def nearest_neighbors(index: GridIndex, p: np.ndarray, k: int) -> np.ndarray:
    """Exact k nearest vertex indices to p (all vertices when k exceeds the count)"""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return index.nearest(p, k)[0]


def within_radius(index: GridIndex, p: np.ndarray, r: float) -> np.ndarray:
    """Vertex indices within distance r of p, ascending"""
    return index.within(p, r)
