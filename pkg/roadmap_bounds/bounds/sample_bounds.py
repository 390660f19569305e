"""
Sample Bounds
Finite-sample counts sufficient for uniform samples to form an alpha-net of the free space.
Closed-form VC bound, the tight numerical search over the failure expression, and the asymptotic scaling.
"""

import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, Field
from scipy.special import gammaln, logsumexp

LN2 = math.log(2.0)

# Smallest gamma accepted before taking logs.
GAMMA_FLOOR = 1e-300

FACTOR_TWO_PROVENANCE = (
    "failure expression 2 * sum_{i=1}^{d+1} C(2n, i) * 2^(-p n / 2); "
    "leading factor 2 carried from the VC epsilon-net theorem"
)


class BoundQuery(BaseModel):
    """Dimension, ball measure p = P(B_alpha) and failure probability gamma"""
    dim: int = Field(ge=1, description="Ambient dimension d")
    ball_measure: float = Field(gt=0.0, lt=1.0, description="Probability mass p of an alpha-ball")
    gamma: float = Field(gt=0.0, lt=1.0, description="Allowed failure probability")


class BoundResult(BaseModel):
    """Sample count with the evidence that produced it"""
    samples: int = Field(ge=1, description="Sufficient sample count n*")
    log_failure_at_n: float = Field(description="Natural log of the failure bound at n*")
    method: Literal["closed_form", "numerical"]
    search_trace: Optional[List[Tuple[int, float]]] = Field(
        default=None, description="(n, log failure) pairs evaluated during the search"
    )
    evaluations: int = Field(default=0, description="Failure-expression evaluations used")
    provenance: str = Field(default=FACTOR_TWO_PROVENANCE)
    ball_measure: Optional[float] = None
    alpha: Optional[float] = None
    fully_covered: bool = Field(default=False, description="A single alpha-ball covers the free space")

    def __str__(self) -> str:
        return f"{self.method}: n*={self.samples} (ln failure {self.log_failure_at_n:.4f})"


def unit_ball_volume(d: int) -> float:
    """Lebesgue volume of the d-dimensional unit Euclidean ball, pi^(d/2) / Gamma(d/2 + 1)"""
    if d < 1:
        raise ValueError(f"Dimension must be >= 1, got {d}")
    return float(np.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0)))


def ball_measure(d: int, alpha: float, free_volume: float) -> float:
    """
    Probability mass of an alpha-ball under the uniform measure on the free space.

    A value >= 1 means one ball covers the whole space; callers decide how to
    treat it (samples_for_clearance reports it as fully covered).
    """
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not free_volume > 0.0:
        raise ValueError(f"free_volume must be positive, got {free_volume}")
    return unit_ball_volume(d) * alpha ** d / free_volume


def clearance_to_net_radius(delta: float) -> float:
    """A radius-4*alpha PRM over an alpha-net finds 2*alpha-clear paths, so alpha = delta / 2"""
    if not delta > 0.0:
        raise ValueError(f"Clearance must be positive, got {delta}")
    return delta / 2.0


def _log_binomials(m: int, top: int) -> np.ndarray:
    """ln C(m, i) for i = 1..top via falling-factorial log sums (exact for huge m)"""
    i = np.arange(1, top + 1, dtype=float)
    log_falling = np.cumsum(np.log(m - np.arange(top, dtype=float)))
    return log_falling - gammaln(i + 1.0)


def log_failure_prob(n: int, q: BoundQuery) -> float:
    """
    Natural log of the probability that n uniform samples fail to be an alpha-net.

    Evaluates ln(2 * sum_{i=1}^{d+1} C(2n, i) * 2^(-p n / 2)) entirely in log
    space. Terms with i > 2n vanish.

    Args:
        n: Sample count, at least 1
        q: Bound query

    Returns:
        Finite natural-log failure bound
    """
    if n < 1:
        raise ValueError(f"Sample count must be >= 1, got {n}")
    m = 2 * int(n)
    top = min(q.dim + 1, m)
    log_sum = float(logsumexp(_log_binomials(m, top)))
    return LN2 + log_sum - 0.5 * q.ball_measure * n * LN2


def closed_form_bound(q: BoundQuery) -> BoundResult:
    """
    VC epsilon-net bound with base-2 logarithms:
    n = ceil(max((4/p) log2(2/gamma), (8d/p) log2(13/p))).
    """
    p = q.ball_measure
    gamma = max(q.gamma, GAMMA_FLOOR)
    confidence_arm = (4.0 / p) * math.log2(2.0 / gamma)
    complexity_arm = (8.0 * q.dim / p) * math.log2(13.0 / p)
    n = int(math.ceil(max(confidence_arm, complexity_arm)))
    return BoundResult(
        samples=n,
        log_failure_at_n=log_failure_prob(n, q),
        method="closed_form",
        evaluations=1,
        ball_measure=p,
    )


def numerical_sample_bound(q: BoundQuery) -> BoundResult:
    """
    Tightest sample count for the failure expression.

    Finds the smallest n with f(n) < ln(gamma) and f(n + 1) < f(n), where f is
    log_failure_prob. f rises to a single peak and then decreases, so the
    predicate is false up to some n* and true after it. A doubling phase from
    N_u = 1 brackets n*, then binary search narrows [N_l, N_u].

    Args:
        q: Bound query

    Returns:
        BoundResult whose search_trace holds every (n, f(n)) evaluated
    """
    ln_gamma = math.log(max(q.gamma, GAMMA_FLOOR))
    evaluated: Dict[int, float] = {}

    def f(n: int) -> float:
        if n not in evaluated:
            evaluated[n] = log_failure_prob(n, q)
        return evaluated[n]

    def accepted(n: int) -> bool:
        value = f(n)
        return value < ln_gamma and f(n + 1) < value

    # 1. Doubling
    n_upper = 1
    while not accepted(n_upper):
        n_upper *= 2
    n_lower = n_upper // 2 if n_upper > 1 else 0

    # 2. Binary search, keeping accepted(n_upper) and not accepted(n_lower)
    while n_lower + 1 < n_upper:
        mid = (n_lower + n_upper) // 2
        if accepted(mid):
            n_upper = mid
        else:
            n_lower = mid

    trace = sorted(evaluated.items())
    logger.debug(
        f"Numerical bound d={q.dim}, p={q.ball_measure:.6g}, gamma={q.gamma:.3g}: "
        f"n*={n_upper} after {len(trace)} evaluations"
    )
    return BoundResult(
        samples=n_upper,
        log_failure_at_n=evaluated[n_upper],
        method="numerical",
        search_trace=trace,
        evaluations=len(trace),
        ball_measure=q.ball_measure,
    )


def asymptotic_constant(d: int) -> float:
    """C_d = 2^d d^((d+1)/2) / (2 pi e)^(d/2)"""
    if d < 1:
        raise ValueError(f"Dimension must be >= 1, got {d}")
    return 2.0 ** d * d ** ((d + 1) / 2.0) / (2.0 * math.pi * math.e) ** (d / 2.0)


def asymptotic_samples(d: int, delta: float, gamma: float) -> float:
    """
    Leading-order scaling (C_d / delta^d) * (log2(1/gamma) + d * log2(C_d / delta^d)).
    Diagnostic only, not a guarantee.
    """
    if not delta > 0.0:
        raise ValueError(f"Clearance must be positive, got {delta}")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    lead = asymptotic_constant(d) / delta ** d
    return lead * (math.log2(1.0 / gamma) + d * math.log2(lead))


def samples_for_clearance(d: int, delta: float, gamma: float, free_volume: float) -> BoundResult:
    """
    Numerical sample bound for paths of clearance delta.

    Resolves p = ball_measure(d, delta / 2, free_volume). When one ball already
    covers the space the result is a single sample flagged fully_covered.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    alpha = clearance_to_net_radius(delta)
    p = ball_measure(d, alpha, free_volume)
    if p >= 1.0:
        logger.warning(f"Ball of radius {alpha:.6g} covers the free space (p={p:.6g}); one sample suffices")
        return BoundResult(
            samples=1,
            log_failure_at_n=-math.inf,
            method="numerical",
            evaluations=0,
            ball_measure=p,
            alpha=alpha,
            fully_covered=True,
        )
    result = numerical_sample_bound(BoundQuery(dim=d, ball_measure=p, gamma=gamma))
    return result.model_copy(update={"alpha": alpha})
