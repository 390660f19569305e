"""
Radius Bounds
Effective connection radius of KNN roadmaps: the closed-form Chernoff decay bound,
the bisection refinement on the KL tail, and the net-radius ratio diagnostic.
Natural logarithms throughout.
"""

import math
from typing import List, Literal, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field, model_validator
from scipy.special import rel_entr

from config import settings
from roadmap_bounds.bounds.sample_bounds import (
    GAMMA_FLOOR,
    BoundQuery,
    numerical_sample_bound,
    unit_ball_volume,
)
from roadmap_bounds.geometry.environment import Environment

# Bisection steps used to locate the net radius for a given sample count.
NET_RADIUS_ITERATIONS = 100


class RadiusQuery(BaseModel):
    """Inputs of the KNN connection-radius bounds"""
    k: int = Field(ge=1, description="Neighbor count K")
    n: int = Field(ge=2, description="Sample count, n > K")
    gamma: float = Field(gt=0.0, lt=1.0, description="Allowed failure probability")
    dim: int = Field(ge=1, description="Ambient dimension d")
    free_volume: float = Field(gt=0.0, description="Volume of the free space")
    r_max: float = Field(gt=0.0, description="Largest radius considered")
    eps: float = Field(default_factory=lambda: settings.radius_eps, gt=0.0, description="Additive search tolerance")

    @model_validator(mode="after")
    def check_ranges(self) -> "RadiusQuery":
        if self.n <= self.k:
            raise ValueError(f"Sample count n={self.n} must exceed K={self.k}")
        if self.r_max <= self.eps:
            raise ValueError(f"r_max={self.r_max} must exceed eps={self.eps}")
        return self

    @property
    def log_unit_measure(self) -> float:
        """ln P(B_1) under the uniform measure"""
        return math.log(unit_ball_volume(self.dim)) - math.log(self.free_volume)


class RadiusResult(BaseModel):
    """Connection radius (or None when the bound is vacuous) with its certificate"""
    radius: Optional[float] = Field(description="Connection radius, None when no radius qualifies")
    method: Literal["closed_form", "numerical"]
    p: float = Field(description="K / (n - 1)")
    q: Optional[float] = Field(default=None, description="Ball measure at the radius")
    log_failure: Optional[float] = Field(default=None, description="ln((n - 1) exp(-(n - 1) KL(p || q)))")

    def __str__(self) -> str:
        if self.radius is None:
            return f"{self.method}: no radius"
        return f"{self.method}: r={self.radius:.6g}"


class RatioRow(BaseModel):
    """One sample count of the vacuousness diagnostic"""
    n: int
    net_radius: Optional[float] = None
    conn_radius: Optional[float] = None
    ratio: Optional[float] = Field(default=None, description="conn_radius / (4 * net_radius); < 1 is vacuous")
    conn_over_net: Optional[float] = Field(default=None, description="conn_radius / net_radius, compared to 4")


def kl_bernoulli(p: float, q: float) -> float:
    """KL divergence between Bernoulli(p) and Bernoulli(q), both strictly inside (0, 1)"""
    if not (0.0 < p < 1.0 and 0.0 < q < 1.0):
        raise ValueError(f"Bernoulli parameters must lie strictly inside (0, 1), got p={p}, q={q}")
    return float(rel_entr(p, q) + rel_entr(1.0 - p, 1.0 - q))


def _kl_from_log_q(p: float, log_q: np.ndarray) -> np.ndarray:
    """KL(p || q) with q passed as ln q so that tiny radii never underflow"""
    q = np.exp(log_q)
    return p * (math.log(p) - log_q) + (1.0 - p) * (math.log1p(-p) - np.log1p(-q))


def radius_predicate(q: RadiusQuery, radii: np.ndarray) -> np.ndarray:
    """
    Acceptance test of the bisection, vectorized over radii.

    A radius r is accepted when q_r < 1, the tail bound is decreasing in r
    (KL at r - eps/2 strictly exceeds KL at r) and
    ln(n - 1) - (n - 1) * KL(p || q_r) <= ln(gamma).
    """
    r = np.asarray(radii, dtype=float)
    p = q.k / (q.n - 1)
    ln_gamma = math.log(max(q.gamma, GAMMA_FLOOR))
    log_unit = q.log_unit_measure

    with np.errstate(divide="ignore", invalid="ignore"):
        log_q = q.dim * np.log(r) + log_unit
        log_q_probe = q.dim * np.log(r - 0.5 * q.eps) + log_unit
        valid = (r > 0.5 * q.eps) & (log_q < 0.0)
        kl_here = _kl_from_log_q(p, np.where(valid, log_q, -1.0))
        kl_probe = _kl_from_log_q(p, np.where(valid, log_q_probe, -1.0))
    decreasing = kl_probe > kl_here
    # Chernoff exponent of Bin(n - 1, q_r) reaching K
    within_budget = math.log(q.n - 1) - (q.n - 1) * kl_here <= ln_gamma
    return valid & decreasing & within_budget


def _certified(q: RadiusQuery, radius: Optional[float], method: str) -> RadiusResult:
    p = q.k / (q.n - 1)
    if radius is None:
        return RadiusResult(radius=None, method=method, p=p)
    log_q = q.dim * math.log(radius) + q.log_unit_measure
    if log_q >= 0.0:
        return RadiusResult(radius=radius, method=method, p=p, q=math.exp(log_q))
    kl = float(_kl_from_log_q(p, np.asarray(log_q)))
    return RadiusResult(
        radius=radius, method=method, p=p, q=math.exp(log_q), log_failure=math.log(q.n - 1) - (q.n - 1) * kl
    )


def closed_form_radius(q: RadiusQuery) -> RadiusResult:
    """
    r = [(K - sqrt(2K ln(n / gamma))) / ((n - 1) P(B_1))]^(1/d), or None when the
    numerator is not positive.
    """
    numerator = q.k - math.sqrt(2.0 * q.k * math.log(q.n / max(q.gamma, GAMMA_FLOOR)))
    if numerator <= 0.0:
        logger.debug(f"Closed-form radius vacuous at K={q.k}, n={q.n}, gamma={q.gamma}")
        return _certified(q, None, "closed_form")
    log_r = (math.log(numerator) - math.log(q.n - 1) - q.log_unit_measure) / q.dim
    return _certified(q, math.exp(log_r), "closed_form")


def numerical_radius_bound(q: RadiusQuery) -> RadiusResult:
    """
    Largest radius in [eps, r_max] accepted by radius_predicate, within eps.

    Returns r_max when it is accepted and None when eps is not. Otherwise
    bisects keeping the lower end accepted and the upper end rejected, and
    returns the lower end so the certificate holds at the returned radius.

    Raises:
        ValueError: If K / (n - 1) is not below 1
    """
    if q.k >= q.n - 1:
        raise ValueError(f"K / (n - 1) must be below 1, got K={q.k}, n={q.n}")

    def accepted(r: float) -> bool:
        return bool(radius_predicate(q, np.array([r]))[0])

    if accepted(q.r_max):
        return _certified(q, q.r_max, "numerical")
    if not accepted(q.eps):
        logger.debug(f"No radius in [{q.eps}, {q.r_max}] qualifies for K={q.k}, n={q.n}")
        return _certified(q, None, "numerical")

    r_lower, r_upper = q.eps, q.r_max
    steps = 0
    while r_upper - r_lower > q.eps:
        mid = 0.5 * (r_lower + r_upper)
        if not r_lower < mid < r_upper:
            # eps is below float resolution at this radius
            break
        if accepted(mid):
            r_lower = mid
        else:
            r_upper = mid
        steps += 1
    logger.debug(f"Radius bisection K={q.k}, n={q.n}: r={r_lower:.6g} after {steps} steps")
    return _certified(q, r_lower, "numerical")


def default_r_max(env: Environment) -> float:
    """Half the shortest side of the smallest box"""
    return env.smallest_box().shortest_side() / 2.0


def covering_radius(d: int, free_volume: float) -> float:
    """Radius at which a single ball has the volume of the free space"""
    return (free_volume / unit_ball_volume(d)) ** (1.0 / d)


def net_radius_for_samples(n: int, d: int, gamma: float, free_volume: float) -> Optional[float]:
    """
    Smallest alpha whose numerical sample bound at gamma is at most n.

    The bound falls as alpha grows, so this is the finest net that n samples
    certify. Bisects between a millionth of the covering radius and the
    covering radius itself. Returns None when even a ball of nearly the whole
    free-space volume needs more than n samples.
    """
    if n < 1:
        raise ValueError(f"Sample count must be >= 1, got {n}")
    alpha_cover = covering_radius(d, free_volume)
    log_unit = math.log(unit_ball_volume(d)) - math.log(free_volume)

    def needed(alpha: float) -> int:
        p = min(math.exp(log_unit + d * math.log(alpha)), math.nextafter(1.0, 0.0))
        return numerical_sample_bound(BoundQuery(dim=d, ball_measure=p, gamma=gamma)).samples

    alpha_hi = alpha_cover * (1.0 - 1e-12)
    if needed(alpha_hi) > n:
        return None
    alpha_lo = alpha_cover * 1e-6
    if needed(alpha_lo) <= n:
        return alpha_lo

    # needed(alpha_lo) > n >= needed(alpha_hi)
    for _ in range(NET_RADIUS_ITERATIONS):
        mid = 0.5 * (alpha_lo + alpha_hi)
        if needed(mid) <= n:
            alpha_hi = mid
        else:
            alpha_lo = mid
        if alpha_hi - alpha_lo <= 1e-12 * alpha_hi:
            break
    return alpha_hi


def ratio_diagnostic(
    k: int,
    gamma: float,
    d: int,
    free_volume: float,
    n_values: List[int],
    eps: float = 1e-10,
    r_max: Optional[float] = None,
) -> List[RatioRow]:
    """
    Compare the KNN connection radius with four times the net radius.

    Each event gets gamma / 2. A ratio below 1 means the KNN radius can never
    reach the 4 * alpha that the net argument needs, so no sample guarantee
    follows. Entries where either bound is missing keep ratio None.

    Args:
        k: Neighbor count K
        gamma: Total failure probability
        d: Dimension
        free_volume: Volume of the free space
        n_values: Sample counts, each greater than k + 1
        eps: Additive tolerance of the radius bisection
        r_max: Radius search ceiling, defaults to the covering radius

    Returns:
        One RatioRow per n, in input order
    """
    half_gamma = gamma / 2.0
    ceiling = r_max if r_max is not None else covering_radius(d, free_volume)
    rows: List[RatioRow] = []
    for n in n_values:
        if n <= k + 1:
            raise ValueError(f"Each n must exceed K + 1 = {k + 1}, got {n}")
        conn = numerical_radius_bound(
            RadiusQuery(k=k, n=n, gamma=half_gamma, dim=d, free_volume=free_volume, r_max=ceiling, eps=eps)
        ).radius
        net = net_radius_for_samples(n, d, half_gamma, free_volume)
        row = RatioRow(n=n, net_radius=net, conn_radius=conn)
        if conn is not None and net is not None:
            row.ratio = conn / (4.0 * net)
            row.conn_over_net = conn / net
        else:
            logger.warning(f"Ratio missing at n={n}: conn_radius={conn}, net_radius={net}")
        rows.append(row)
        logger.debug(f"Ratio d={d}, n={n}: {row.ratio}")
    return rows
