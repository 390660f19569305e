"""
Geometry Tests
Box unions: hallway construction, membership, exact segment checks against a
dense point oracle, uniform sampling, volumes and JSON files.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

from roadmap_bounds.geometry.environment import (
    Box,
    Environment,
    clip_intervals,
    contains,
    contains_points,
    load_environment,
    make_hallway,
    sample_uniform,
    sample_uniform_batch,
    save_environment,
    segment_free,
    segments_free,
    volume,
    volume_mc,
)


def dense_segment_oracle(env, a, b, points=20001):
    t = np.linspace(0.0, 1.0, points)[:, None]
    return bool(np.all(contains_points(env, np.asarray(a) + t * (np.asarray(b) - np.asarray(a)))))


# Test 1: hallway layout and exact volumes

@pytest.mark.parametrize(
    "d, delta, expected",
    [(2, 0.25, 2.5), (2, 0.499, 2.998), (3, 0.125, 2.0625), (4, 0.0625, 2.0 + 0.125 ** 3)],
)
def test_hallway_volume(d, delta, expected):
    assert volume(make_hallway(d, delta)) == pytest.approx(expected, rel=1e-12)


def test_hallway_box_order(hallway_2d):
    left, right, hall = hallway_2d.boxes
    assert left.lo == (-1.5, -0.5) and left.hi == (-0.5, 0.5)
    assert right.lo == (0.5, -0.5) and right.hi == (1.5, 0.5)
    assert hall.lo == (-0.5, -0.25) and hall.hi == (0.5, 0.25)
    assert hallway_2d.smallest_box() == hall
    assert hallway_2d.bounding_box() == Box(lo=(-1.5, -0.5), hi=(1.5, 0.5))


@pytest.mark.parametrize("d, delta", [(1, 0.25), (2, 0.0), (2, 0.5), (2, -0.1), (3, 0.7)])
def test_hallway_rejects_bad_parameters(d, delta):
    with pytest.raises(ValueError):
        make_hallway(d, delta)


def test_hallways_compare_by_value():
    assert make_hallway(3, 0.125) == make_hallway(3, 0.125)
    assert make_hallway(3, 0.125) != make_hallway(3, 0.25)
    assert len({make_hallway(2, 0.25), make_hallway(2, 0.25)}) == 1


# Test 2: validation

def test_box_needs_positive_extent():
    with pytest.raises(ValidationError):
        Box(lo=(0.0, 1.0), hi=(1.0, 1.0))
    with pytest.raises(ValidationError):
        Box(lo=(0.0,), hi=(1.0, 1.0))


def test_overlapping_boxes_rejected():
    with pytest.raises(ValidationError, match="overlapping"):
        Environment(dim=2, boxes=(Box(lo=(0, 0), hi=(1, 1)), Box(lo=(0.5, 0.5), hi=(2, 2))))


def test_shared_faces_allowed(l_shape):
    assert volume(l_shape) == pytest.approx(3.0)


def test_box_dimension_must_match():
    with pytest.raises(ValidationError):
        Environment(dim=3, boxes=(Box(lo=(0, 0), hi=(1, 1)),))


# Test 3: membership

def test_contains_closed_boundary(hallway_2d):
    assert contains(hallway_2d, [0.0, 0.25])
    assert contains(hallway_2d, [-1.5, -0.5])
    assert contains(hallway_2d, [0.0, 0.0])
    assert not contains(hallway_2d, [0.0, 0.2500001])
    assert not contains(hallway_2d, [2.0, 0.0])


def test_contains_points_vectorized(hallway_2d):
    pts = np.array([[0.0, 0.0], [0.0, 0.4], [1.0, 0.4]])
    assert contains_points(hallway_2d, pts).tolist() == [True, False, True]


def test_contains_rejects_wrong_dimension(hallway_2d):
    with pytest.raises(ValueError, match="dimension"):
        contains(hallway_2d, [0.0, 0.0, 0.0])


# Test 4: exact segment checks

def test_clip_intervals_along_hallway_axis(hallway_2d):
    intervals = clip_intervals(hallway_2d, [-1.0, 0.0], [1.0, 0.0])
    assert intervals == [
        pytest.approx((0.0, 0.25)),
        pytest.approx((0.75, 1.0)),
        pytest.approx((0.25, 0.75)),
    ]


@pytest.mark.parametrize(
    "a, b, free",
    [
        ([-1.0, 0.0], [1.0, 0.0], True),
        ([-1.0, 0.4], [1.0, 0.4], False),
        ([-1.0, -0.4], [1.0, 0.4], True),
        ([-0.5, 0.25], [0.5, 0.25], True),
        ([-1.5, 0.5], [-0.5, 0.5], True),
        ([-1.0, 0.0], [-1.0, 0.0], True),
        ([0.0, 0.3], [0.0, 0.3], False),
    ],
)
def test_segment_free_hallway(hallway_2d, a, b, free):
    assert segment_free(hallway_2d, a, b) is free


def test_segment_through_shared_corner(l_shape):
    # x + y = 2 touches the corner (1, 1) and otherwise stays in the union
    assert segment_free(l_shape, [0.5, 1.5], [1.5, 0.5])
    assert not segment_free(l_shape, [0.5, 1.5], [1.5, 1.2])


def test_segments_free_matches_dense_oracle(l_shape):
    rng = np.random.default_rng(7)
    starts = rng.uniform(0.0, 2.0, size=(300, 2))
    ends = rng.uniform(0.0, 2.0, size=(300, 2))
    exact = segments_free(l_shape, starts, ends)
    expected = [dense_segment_oracle(l_shape, a, b) for a, b in zip(starts, ends)]
    assert exact.tolist() == expected
    assert 0 < exact.sum() < len(exact)


def test_segments_free_matches_dense_oracle_3d(hallway_3d):
    rng = np.random.default_rng(11)
    starts = sample_uniform_batch(hallway_3d, rng, 200)
    ends = sample_uniform_batch(hallway_3d, rng, 200)
    exact = segments_free(hallway_3d, starts, ends)
    expected = [dense_segment_oracle(hallway_3d, a, b) for a, b in zip(starts, ends)]
    assert exact.tolist() == expected


def test_segments_free_shape_mismatch(hallway_2d):
    with pytest.raises(ValueError):
        segments_free(hallway_2d, np.zeros((3, 2)), np.zeros((2, 2)))


def test_segments_free_is_symmetric(l_shape):
    rng = np.random.default_rng(17)
    starts = rng.uniform(0.0, 2.0, size=(500, 2))
    ends = rng.uniform(0.0, 2.0, size=(500, 2))
    assert segments_free(l_shape, starts, ends).tolist() == segments_free(l_shape, ends, starts).tolist()


def test_zero_length_segment_is_membership(l_shape):
    rng = np.random.default_rng(19)
    pts = np.vstack([
        rng.uniform(-0.5, 2.5, size=(300, 2)),
        [[1.0, 1.0], [2.0, 0.0], [0.0, 2.0], [1.0, 2.0], [2.0, 1.0], [1.5, 1.5]],
    ])
    assert segments_free(l_shape, pts, pts).tolist() == contains_points(l_shape, pts).tolist()


# Test 5: sampling

def test_samples_lie_in_free_space(hallway_3d, rng):
    pts = sample_uniform_batch(hallway_3d, rng, 5000)
    assert pts.shape == (5000, 3)
    assert contains_points(hallway_3d, pts).all()


def test_samples_follow_box_volumes(hallway_2d, rng):
    pts = sample_uniform_batch(hallway_2d, rng, 40_000)
    in_hallway = np.abs(pts[:, 0]) < 0.5
    # Hallway holds 0.5 of the 2.5 total volume
    assert in_hallway.mean() == pytest.approx(0.2, abs=0.01)


def test_box_counts_pass_chi_square(hallway_2d, rng):
    pts = sample_uniform_batch(hallway_2d, rng, 100_000)
    box = np.where(pts[:, 0] < -0.5, 0, np.where(pts[:, 0] > 0.5, 1, 2))
    observed = np.bincount(box, minlength=3)
    expected = np.array([0.4, 0.4, 0.2]) * len(pts)
    assert chisquare(observed, expected).pvalue > 0.01


def test_split_draws_continue_the_stream(hallway_2d):
    whole = sample_uniform_batch(hallway_2d, np.random.default_rng(3), 1000)
    rng = np.random.default_rng(3)
    parts = np.vstack([sample_uniform_batch(hallway_2d, rng, 500), sample_uniform_batch(hallway_2d, rng, 500)])
    assert np.array_equal(whole, parts)
    assert np.array_equal(sample_uniform(hallway_2d, np.random.default_rng(3)), whole[0])


def test_negative_sample_count(hallway_2d, rng):
    with pytest.raises(ValueError):
        sample_uniform_batch(hallway_2d, rng, -1)


# Test 6: volumes

def test_volume_mc_close_to_exact(hallway_2d, rng):
    estimate = volume_mc(hallway_2d, hallway_2d.bounding_box(), 200_000, rng)
    # Binomial std of the estimate is about 3 * sqrt(0.83 * 0.17 / 2e5) ~ 0.0025
    assert estimate == pytest.approx(2.5, abs=0.015)


def test_volume_mc_rejects_small_bounding_box(hallway_2d, rng):
    with pytest.raises(ValueError, match="does not contain"):
        volume_mc(hallway_2d, Box(lo=(-1.0, -0.5), hi=(1.0, 0.5)), 100, rng)


def test_cumulative_volumes(hallway_2d):
    assert hallway_2d.cumulative_volumes == pytest.approx((1.0, 2.0, 2.5))
    assert math.isclose(hallway_2d.cumulative_volumes[-1], volume(hallway_2d))


# Test 7: JSON files

def test_environment_file_round_trip(tmp_path, l_shape):
    path = save_environment(l_shape, tmp_path / "l_shape.json")
    assert load_environment(path) == l_shape


def test_environment_file_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"dim": 2,\n "boxes": [}')
    with pytest.raises(ValueError, match="line 2"):
        load_environment(path)


def test_environment_file_validation(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 2, "boxes": [{"lo": [0, 0], "hi": [0, 1]}]}')
    with pytest.raises(ValidationError):
        load_environment(path)
