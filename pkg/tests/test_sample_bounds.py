"""
Sample Bound Tests
Failure expression against exact integer arithmetic, the numerical search against
a linear scan, the closed-form comparison and the hallway bound column.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from roadmap_bounds.bounds.sample_bounds import (
    BoundQuery,
    asymptotic_constant,
    asymptotic_samples,
    ball_measure,
    clearance_to_net_radius,
    closed_form_bound,
    log_failure_prob,
    numerical_sample_bound,
    samples_for_clearance,
    unit_ball_volume,
)
from roadmap_bounds.geometry.environment import make_hallway, volume


def exact_log_failure(n: int, d: int, p: float) -> float:
    """ln(2 * sum_{i=1}^{d+1} C(2n, i) * 2^(-p n / 2)) with the binomial sum in exact integers"""
    binomial_sum = sum(math.comb(2 * n, i) for i in range(1, d + 2))
    return math.log(2) + math.log(binomial_sum) - 0.5 * p * n * math.log(2)


def linear_scan_bound(q: BoundQuery, limit: int = 10_000) -> int:
    ln_gamma = math.log(q.gamma)
    prev = log_failure_prob(1, q)
    for n in range(1, limit + 1):
        nxt = log_failure_prob(n + 1, q)
        if prev < ln_gamma and nxt < prev:
            return n
        prev = nxt
    raise AssertionError(f"No sample count up to {limit}")


# Test 1: ball measure and clearance conversion

@pytest.mark.parametrize("d, expected", [(1, 2.0), (2, math.pi), (3, 4.0 * math.pi / 3.0), (4, math.pi ** 2 / 2.0)])
def test_unit_ball_volume(d, expected):
    assert unit_ball_volume(d) == pytest.approx(expected, rel=1e-12)


def test_ball_measure_scales_with_alpha_power():
    base = ball_measure(3, 0.1, 2.0)
    assert ball_measure(3, 0.2, 2.0) == pytest.approx(8.0 * base, rel=1e-12)
    assert ball_measure(2, 0.125, 2.5) == pytest.approx(math.pi * 0.125 ** 2 / 2.5, rel=1e-12)


@pytest.mark.parametrize("alpha, free_volume", [(0.0, 1.0), (-0.1, 1.0), (0.1, 0.0)])
def test_ball_measure_rejects_nonpositive(alpha, free_volume):
    with pytest.raises(ValueError):
        ball_measure(2, alpha, free_volume)


def test_clearance_to_net_radius():
    assert clearance_to_net_radius(0.25) == 0.125
    with pytest.raises(ValueError):
        clearance_to_net_radius(0.0)


# Test 2: failure expression

@pytest.mark.parametrize("n", [1, 2, 3, 10, 137, 4096, 10 ** 6, 10 ** 9])
@pytest.mark.parametrize("d", [1, 2, 6])
def test_log_failure_matches_exact_integers(n, d):
    q = BoundQuery(dim=d, ball_measure=0.01, gamma=0.01)
    assert log_failure_prob(n, q) == pytest.approx(exact_log_failure(n, d, 0.01), rel=1e-10, abs=1e-9)


def test_log_failure_drops_vanishing_terms():
    # With 2n = 2 only C(2, 1) and C(2, 2) survive
    q = BoundQuery(dim=5, ball_measure=0.5, gamma=0.1)
    expected = math.log(2.0 * 3.0) - 0.25 * math.log(2.0)
    assert log_failure_prob(1, q) == pytest.approx(expected, rel=1e-12)


def test_log_failure_finite_for_huge_n():
    q = BoundQuery(dim=6, ball_measure=1e-9, gamma=0.01)
    value = log_failure_prob(10 ** 15, q)
    assert math.isfinite(value)


def test_log_failure_at_hallway_bound():
    q = BoundQuery(dim=2, ball_measure=0.0652315, gamma=0.01)
    value = log_failure_prob(1190, q)
    assert value == pytest.approx(exact_log_failure(1190, 2, 0.0652315), rel=1e-12)
    assert value == pytest.approx(-4.677, abs=0.01)
    assert value < math.log(0.01)
    assert 1186 <= numerical_sample_bound(q).samples <= 1190


@pytest.mark.parametrize(
    "d, p", [(1, 0.5), (2, 0.0652315), (2, 0.785398), (3, 1e-3), (6, 0.01), (8, 1e-4)]
)
def test_log_failure_rises_then_falls(d, p):
    q = BoundQuery(dim=d, ball_measure=p, gamma=0.01)
    grid = np.unique(np.geomspace(1, 1e8, 600).astype(np.int64))
    values = np.array([log_failure_prob(int(n), q) for n in grid])
    signs = np.sign(np.diff(values))
    signs = signs[signs != 0]
    changes = np.count_nonzero(signs[1:] != signs[:-1])
    assert changes <= 1
    if changes:
        assert signs[0] > 0 and signs[-1] < 0


def test_log_failure_rejects_zero_samples():
    with pytest.raises(ValueError):
        log_failure_prob(0, BoundQuery(dim=2, ball_measure=0.1, gamma=0.1))


@pytest.mark.parametrize("p, gamma", [(0.0, 0.1), (1.0, 0.1), (0.1, 0.0), (0.1, 1.0)])
def test_bound_query_ranges(p, gamma):
    with pytest.raises(ValidationError):
        BoundQuery(dim=2, ball_measure=p, gamma=gamma)


# Test 3: numerical search

@pytest.mark.parametrize(
    "d, p, gamma",
    [(1, 0.5, 0.1), (2, 0.1, 0.01), (2, 0.05, 1e-4), (3, 0.2, 0.05), (4, 0.3, 1e-6), (6, 0.4, 0.01), (2, 0.02, 0.5)],
)
def test_numerical_bound_matches_linear_scan(d, p, gamma):
    q = BoundQuery(dim=d, ball_measure=p, gamma=gamma)
    result = numerical_sample_bound(q)
    assert result.samples == linear_scan_bound(q)
    assert result.method == "numerical"


def test_numerical_bound_certificate_on_random_queries():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        d = int(rng.integers(1, 9))
        p = float(10 ** rng.uniform(-4, math.log10(0.5)))
        gamma = float(10 ** rng.uniform(-6, math.log10(0.5)))
        result = numerical_sample_bound(BoundQuery(dim=d, ball_measure=p, gamma=gamma))
        n = result.samples
        assert exact_log_failure(n, d, p) < math.log(gamma)
        assert exact_log_failure(n + 1, d, p) < exact_log_failure(n, d, p)
        if n > 1:
            assert exact_log_failure(n - 1, d, p) >= math.log(gamma)


def test_search_trace_is_complete():
    q = BoundQuery(dim=3, ball_measure=0.01, gamma=0.01)
    result = numerical_sample_bound(q)
    trace = dict(result.search_trace)
    assert result.evaluations == len(result.search_trace)
    assert result.samples in trace and result.samples + 1 in trace
    assert result.log_failure_at_n == trace[result.samples]
    assert [n for n, _ in result.search_trace] == sorted(trace)
    # Doubling then bisection stays logarithmic in n*
    assert result.evaluations < 4 * math.log2(result.samples) + 10


def test_numerical_bound_reports_factor_two():
    result = numerical_sample_bound(BoundQuery(dim=2, ball_measure=0.1, gamma=0.1))
    assert "factor 2" in result.provenance


# Test 4: closed form and monotonicity

@pytest.mark.parametrize("gamma", [0.5] + [10.0 ** -e for e in range(1, 9)])
@pytest.mark.parametrize("p", [0.5, 0.1, 1e-2, 1e-3])
@pytest.mark.parametrize("d", range(2, 9))
def test_numerical_never_exceeds_closed_form(d, p, gamma):
    q = BoundQuery(dim=d, ball_measure=p, gamma=gamma)
    assert numerical_sample_bound(q).samples <= closed_form_bound(q).samples


def test_closed_form_value():
    q = BoundQuery(dim=2, ball_measure=0.1, gamma=0.01)
    expected = math.ceil(max(40.0 * math.log2(200.0), 160.0 * math.log2(130.0)))
    assert closed_form_bound(q).samples == expected


@pytest.mark.parametrize("gamma, expected", [(0.1, 83), (0.5, 83), (1e-18, 310)])
def test_closed_form_unit_square_half_net(gamma, expected):
    # p = pi / 4: the complexity arm dominates until gamma gets tiny
    q = BoundQuery(dim=2, ball_measure=0.785398, gamma=gamma)
    assert closed_form_bound(q).samples == expected


def test_bound_monotone_in_gamma_and_p():
    by_gamma = [numerical_sample_bound(BoundQuery(dim=3, ball_measure=0.01, gamma=g)).samples
                for g in (0.5, 0.1, 0.01, 1e-4)]
    assert by_gamma == sorted(by_gamma)
    by_p = [numerical_sample_bound(BoundQuery(dim=3, ball_measure=p, gamma=0.01)).samples
            for p in (0.5, 0.1, 0.01, 1e-3)]
    assert by_p == sorted(by_p) and by_p[0] < by_p[-1]


def test_asymptotic_samples_scaling():
    coarse = asymptotic_samples(2, 0.25, 0.01)
    fine = asymptotic_samples(2, 0.125, 0.01)
    assert 0 < coarse < fine
    assert asymptotic_samples(2, 0.25, 1e-4) > coarse
    with pytest.raises(ValueError):
        asymptotic_samples(2, 0.25, 1.0)


def test_asymptotic_constant():
    assert asymptotic_constant(2) == pytest.approx(4.0 * 2.0 ** 1.5 / (2.0 * math.pi * math.e), rel=1e-12)
    assert asymptotic_constant(2) == pytest.approx(0.66241, abs=1e-5)
    with pytest.raises(ValueError):
        asymptotic_constant(0)


@pytest.mark.parametrize("d, delta, gamma", [(2, 0.25, 0.01), (3, 0.125, 0.1), (6, 0.5, 1e-4)])
def test_asymptotic_gamma_decade_adds_log2_ten(d, delta, gamma):
    lead = asymptotic_constant(d) / delta ** d
    step = asymptotic_samples(d, delta, gamma / 10.0) - asymptotic_samples(d, delta, gamma)
    assert step == pytest.approx(lead * math.log2(10.0), rel=1e-9)


# Test 5: hallway bound column (gamma = 0.01, alpha = delta / 2, exact hallway volumes)

TABLE_BOUNDS = {
    0.499: [1.19e3, 5.20e3, 2.46e4, 1.24e5, 6.60e5],
    0.25: [4.53e3, 3.73e4, 3.45e5, 3.45e6, 3.67e7],
    0.125: [1.86e4, 3.24e5, 6.36e6, 1.33e8, 2.89e9],
    0.0625: [7.88e4, 2.93e6, 1.19e8, 5.04e9, 2.21e11],
}


@pytest.mark.parametrize(
    "delta, d, expected",
    [(delta, d, value) for delta, row in TABLE_BOUNDS.items() for d, value in zip(range(2, 7), row)],
)
def test_hallway_bound_column(delta, d, expected):
    result = samples_for_clearance(d, delta, 0.01, volume(make_hallway(d, delta)))
    assert result.samples == pytest.approx(expected, rel=0.01)
    assert result.alpha == delta / 2.0
    assert not result.fully_covered


def test_fully_covered_space(unit_square):
    result = samples_for_clearance(2, 2.0, 0.1, volume(unit_square))
    assert result.fully_covered
    assert result.samples == 1
    assert result.log_failure_at_n == -math.inf


def test_samples_for_clearance_rejects_gamma():
    with pytest.raises(ValueError):
        samples_for_clearance(2, 0.25, 0.0, 2.5)
