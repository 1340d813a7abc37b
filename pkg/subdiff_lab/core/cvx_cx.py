"""
Random convex counterexample in the plane.

g(xi, x) = x1 + sum_k psi_k(x2) (2 bit_k(xi) - 1) with C^2 bumps psi_k
supported on B(1/k, r_k), and f(xi, x) = max{g(xi, x), 0} + 35 |x|^2.

Every formula is a polynomial in its inputs, so Fraction coordinates give
exact values, exact signs of g and exact subdifferentials.
"""
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Optional, Sequence, Tuple
import logging
import math

from .base import DomainError
from .dyadic import (
    BitStream,
    Capacity,
    DEFAULT_CAPACITY,
    K_bound,
    find_joint_one_bit,
    spawn_streams,
)
from .reports import GapTrial
from .setval import ConvexPolygon, Point, Segment2, SetValue, hausdorff, minkowski_average

logger = logging.getLogger(__name__)


class CvxGeometry:
    """Constants of the construction"""
    C = 70

    @staticmethod
    def r(k: int) -> Fraction:
        return Fraction(1, 8 * k * k)

    @staticmethod
    def eta(k: int) -> Fraction:
        return CvxGeometry.r(k) ** 2

    @staticmethod
    def p(k: int) -> Tuple[Fraction, Fraction]:
        return (Fraction(0), Fraction(1, k))

    @staticmethod
    def Delta(k: int) -> Fraction:
        """1/(32 C k^4) = 1/(2240 k^4), strictly below r_k/2"""
        return Fraction(1, 32 * CvxGeometry.C * k ** 4)

    @staticmethod
    def delta_nu(nu: int, capacity: Capacity = DEFAULT_CAPACITY) -> Fraction:
        K = K_bound(nu, capacity)
        return Fraction(1, 2240 * K ** 4)


def smoothstep(t: Real) -> Real:
    """theta(t) = 6t^5 - 15t^4 + 10t^3"""
    return t ** 3 * (6 * t ** 2 - 15 * t + 10)


def _smoothstep_d1(t: Real) -> Real:
    return 30 * t ** 2 * (t - 1) ** 2


def _smoothstep_d2(t: Real) -> Real:
    return 60 * t * (t - 1) * (2 * t - 1)


def _sign(t: Real) -> int:
    return int(t > 0) - int(t < 0)


def bump(t: Real) -> Real:
    """rho: 1 on [-1/2, 1/2], 0 outside (-1, 1), 1 - theta(2|t| - 1) in between"""
    a = abs(t)
    if a >= 1:
        return 0
    if 2 * a <= 1:
        return 1
    return 1 - smoothstep(2 * a - 1)


def bump_d1(t: Real) -> Real:
    a = abs(t)
    if a >= 1 or 2 * a <= 1:
        return 0
    return -2 * _sign(t) * _smoothstep_d1(2 * a - 1)


def bump_d2(t: Real) -> Real:
    a = abs(t)
    if a >= 1 or 2 * a <= 1:
        return 0
    return -4 * _smoothstep_d2(2 * a - 1)


def _bump_arg(k: int, t: Real) -> Real:
    return (t - Fraction(1, k)) / CvxGeometry.r(k)


def psi(k: int, t: Real) -> Real:
    """psi_k(t) = eta_k rho((t - 1/k) / r_k)"""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    return CvxGeometry.eta(k) * bump(_bump_arg(k, t))


def psi_d1(k: int, t: Real) -> Real:
    """psi_k' = (eta_k / r_k) rho' = r_k rho'"""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    return CvxGeometry.r(k) * bump_d1(_bump_arg(k, t))


def psi_d2(k: int, t: Real) -> Real:
    """psi_k'' = (eta_k / r_k^2) rho'' = rho''"""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    return bump_d2(_bump_arg(k, t))


@dataclass
class ConvexScenario:
    """f(xi, .) for one sample xi"""
    xi: BitStream


def active_bump(x2: Real) -> Optional[int]:
    """k with x2 inside the open support B(1/k, r_k), among floor(1/x2) +- 1"""
    X = Fraction(x2)
    if X <= 0:
        return None
    m = math.floor(1 / X)
    for k in range(max(1, m - 1), m + 2):
        if abs(X - Fraction(1, k)) < CvxGeometry.r(k):
            return k
    return None


def _signed_bit(s: ConvexScenario, k: int) -> int:
    return 2 * s.xi.bit(k) - 1


def eval_g(s: ConvexScenario, x: Point) -> Real:
    k = active_bump(x[1])
    if k is None:
        return x[0]
    return x[0] + psi(k, x[1]) * _signed_bit(s, k)


def grad_g(s: ConvexScenario, x: Point) -> Point:
    k = active_bump(x[1])
    if k is None:
        return (1, 0)
    return (1, psi_d1(k, x[1]) * _signed_bit(s, k))


def eval_f(s: ConvexScenario, x: Point) -> Real:
    return max(eval_g(s, x), 0) + 35 * (x[0] ** 2 + x[1] ** 2)


def subdiff_f(s: ConvexScenario, x: Point) -> Segment2:
    """Max rule: {grad g + 70x}, {70x}, or the segment between them when g = 0."""
    g = eval_g(s, x)
    base = (70 * x[0], 70 * x[1])
    if g < 0:
        return Segment2.point(base)
    gradient = grad_g(s, x)
    if g > 0:
        return Segment2.point((base[0] + gradient[0], base[1] + gradient[1]))
    return Segment2(base=base, dir=gradient)


def _check_ball(y: Point, k: int) -> None:
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    p = CvxGeometry.p(k)
    d0, d1 = Fraction(y[0]) - p[0], Fraction(y[1]) - p[1]
    if d0 * d0 + d1 * d1 > CvxGeometry.Delta(k) ** 2:
        raise DomainError(f"y={y} lies outside B(p_{k}, Delta_{k}); gradient formula not certified there")


def expected_grad_ball(k: int, y: Point) -> Point:
    """E grad f(xi, y) = (1/2, 0) + 70y on B(p_k, Delta_k)"""
    _check_ball(y, k)
    return (Fraction(1, 2) + 70 * Fraction(y[0]), 70 * Fraction(y[1]))


def empirical_avg_subdiff(samples: Sequence[ConvexScenario], y: Point, k: int) -> SetValue:
    """Minkowski average of the nu subdifferentials at y, a single point on the ball"""
    if not samples:
        raise DomainError("At least one sample is required")
    _check_ball(y, k)
    y = (Fraction(y[0]), Fraction(y[1]))
    return minkowski_average([subdiff_f(s, y) for s in samples])


def gap_trial_2d(streams: Sequence[BitStream], seed: int, capacity: Capacity = DEFAULT_CAPACITY) -> GapTrial:
    """Gap at y = p_{k^nu} for the supplied samples, with the ball-perturbation bounds."""
    nu = len(streams)
    K = K_bound(nu, capacity)
    delta = CvxGeometry.delta_nu(nu, capacity)
    bounds = dict(
        bound_140_delta=140 * delta,
        lower_bound=Fraction(1, 2) - 140 * delta,
        eps_max=delta ** 2,
        eps_lower_bound=Fraction(1, 2) - 142 * delta,
    )
    k = find_joint_one_bit(streams, K)
    if k is None:
        logger.warning(f"No joint one-bit among the first {K} indices (nu={nu}, seed={seed})")
        return GapTrial(seed=seed, nu=nu, K=K, delta=delta, found=False, **bounds)
    scenarios = [ConvexScenario(xi=stream) for stream in streams]
    y = CvxGeometry.p(k)
    expected = ConvexPolygon.from_points([expected_grad_ball(k, y)])
    empirical = empirical_avg_subdiff(scenarios, y, k)
    gap = hausdorff(expected, empirical)
    logger.debug(f"nu={nu} seed={seed}: k={k} gap={gap}")
    return GapTrial(seed=seed, nu=nu, K=K, delta=delta, found=True, k=k, gap=gap, **bounds)


def gap_experiment_2d(nu: int, seed: int, capacity: Capacity = DEFAULT_CAPACITY) -> GapTrial:
    """Sample nu streams from `seed` and evaluate the gap."""
    K_bound(nu, capacity)
    return gap_trial_2d(spawn_streams(seed, nu, capacity.max_bits), seed, capacity)
