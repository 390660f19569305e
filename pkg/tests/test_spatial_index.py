"""
Spatial Index Tests
Grid queries against brute-force linear scans, including ties and clustered data.
"""

import numpy as np
import pytest

from roadmap_bounds.prm.spatial_index import GridIndex, nearest_neighbors, pairwise_distances, within_radius


def brute_nearest(points, p, k, exclude=None):
    dist = np.linalg.norm(points - p, axis=1)
    idx = np.arange(len(points))
    if exclude is not None:
        keep = idx != exclude
        idx, dist = idx[keep], dist[keep]
    order = np.lexsort((idx, dist))[:k]
    return idx[order], dist[order]


@pytest.fixture(params=["grid", "brute"])
def index_mode(request):
    return request.param


def make_index(points, mode):
    return GridIndex(points, brute_force_below=0 if mode == "grid" else len(points) + 1)


@pytest.fixture
def clustered_points():
    rng = np.random.default_rng(5)
    dense = rng.normal(0.0, 0.01, size=(1500, 2))
    sparse = rng.uniform(-3.0, 3.0, size=(500, 2))
    return np.vstack([dense, sparse])


# Test 1: k nearest

@pytest.mark.parametrize("d", [2, 3, 5])
def test_nearest_matches_brute_force(d, index_mode):
    rng = np.random.default_rng(d)
    points = rng.random((2000, d))
    index = make_index(points, index_mode)
    for p in rng.uniform(-0.2, 1.2, size=(40, d)):
        got_idx, got_dist = index.nearest(p, 7)
        want_idx, want_dist = brute_nearest(points, p, 7)
        assert got_idx.tolist() == want_idx.tolist()
        assert np.allclose(got_dist, want_dist)


def test_nearest_on_clustered_points(clustered_points, index_mode):
    index = make_index(clustered_points, index_mode)
    for p in [np.zeros(2), np.array([2.5, -2.5]), np.array([10.0, 10.0])]:
        assert index.nearest(p, 16)[0].tolist() == brute_nearest(clustered_points, p, 16)[0].tolist()


def test_ties_break_by_lower_index(index_mode):
    # Eight points on a lattice, four of them equidistant from the origin
    points = np.array([[1, 0], [0, 1], [-1, 0], [0, -1], [2, 2], [-2, 2], [2, -2], [-2, -2]], dtype=float)
    index = make_index(np.tile(points, (100, 1)), index_mode)
    idx, dist = index.nearest(np.zeros(2), 3)
    assert idx.tolist() == [0, 1, 2]
    assert np.allclose(dist, 1.0)


def test_nearest_excludes_and_clips(index_mode):
    points = np.random.default_rng(1).random((600, 2))
    index = make_index(points, index_mode)
    idx, _ = index.nearest(points[10], 5, exclude=10)
    assert 10 not in idx.tolist()
    assert idx.tolist() == brute_nearest(points, points[10], 5, exclude=10)[0].tolist()
    assert len(index.nearest(points[0], 10_000)[0]) == 600


def test_nearest_neighbors_rejects_zero_k():
    index = GridIndex(np.random.default_rng(0).random((10, 2)))
    with pytest.raises(ValueError):
        nearest_neighbors(index, np.zeros(2), 0)


# Test 2: range queries

def test_within_matches_brute_force(index_mode):
    rng = np.random.default_rng(8)
    points = rng.random((3000, 3))
    index = make_index(points, index_mode)
    for p in rng.random((30, 3)):
        expected = np.nonzero(np.linalg.norm(points - p, axis=1) <= 0.1)[0]
        assert within_radius(index, p, 0.1).tolist() == expected.tolist()


def test_within_rejects_negative_radius():
    with pytest.raises(ValueError):
        GridIndex(np.zeros((3, 2))).within(np.zeros(2), -1.0)


def test_pairs_within_matches_brute_force(index_mode):
    rng = np.random.default_rng(21)
    points = rng.random((1200, 2))
    index = make_index(points, index_mode)
    dist = pairwise_distances(points, points)
    i, j = np.nonzero(np.triu(dist <= 0.03, k=1))
    expected = np.stack([i, j], axis=1)
    got = index.pairs_within(0.03)
    assert got.tolist() == expected[np.lexsort((expected[:, 1], expected[:, 0]))].tolist()

    newer = index.pairs_within(0.03, since=1000)
    assert newer.tolist() == [pair for pair in got.tolist() if pair[1] >= 1000]


# Test 3: bulk queries

def test_knn_all_matches_brute_force(clustered_points, index_mode):
    index = make_index(clustered_points, index_mode)
    neighbors, distances = index.knn_all(8)
    assert neighbors.shape == (len(clustered_points), 8)
    for v in range(0, len(clustered_points), 97):
        want_idx, want_dist = brute_nearest(clustered_points, clustered_points[v], 8, exclude=v)
        assert neighbors[v].tolist() == want_idx.tolist()
        assert np.allclose(distances[v], want_dist)


def test_knn_all_small_sets():
    index = GridIndex(np.array([[0.0, 0.0], [1.0, 0.0]]))
    neighbors, distances = index.knn_all(5)
    assert neighbors.tolist() == [[1], [0]]
    assert distances.tolist() == [[1.0], [1.0]]


def test_nearest_many_matches_brute_force(index_mode):
    rng = np.random.default_rng(13)
    points = rng.random((2500, 2))
    queries = rng.uniform(-0.5, 1.5, size=(4000, 2))
    idx, dist = make_index(points, index_mode).nearest_many(queries)
    full = pairwise_distances(queries, points)
    assert idx.tolist() == np.argmin(full, axis=1).tolist()
    assert np.allclose(dist, full.min(axis=1))


def test_duplicate_points():
    points = np.zeros((700, 2))
    index = GridIndex(points, brute_force_below=0)
    idx, dist = index.nearest(np.zeros(2), 4)
    assert idx.tolist() == [0, 1, 2, 3]
    assert np.all(dist == 0.0)
