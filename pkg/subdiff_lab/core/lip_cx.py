"""
Random 1-Lipschitz counterexample: f(xi, x) = integral of a random square wave.

g(xi, x) = sum_k 1_{B_k}(x) bit_k(xi) with B_k = (1/k - r_k, 1/k + r_k),
r_k = 1/(4k^2), and f(xi, x) = int_0^{max(x,0)} g(xi, t) dt.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Real
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np

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
from .setval import Interval, hausdorff

logger = logging.getLogger(__name__)

_EPS = 2.0 ** -52


class LipGeometry:
    """Constants of the construction, all exact rationals"""

    @staticmethod
    def r(k: int) -> Fraction:
        return Fraction(1, 4 * k * k)

    @staticmethod
    def p(k: int) -> Fraction:
        return Fraction(1, k)

    @staticmethod
    def ball(k: int) -> Tuple[Fraction, Fraction]:
        """Endpoints of the open set B_k"""
        return Fraction(1, k) - LipGeometry.r(k), Fraction(1, k) + LipGeometry.r(k)

    @staticmethod
    def Delta(k: int) -> Fraction:
        return Fraction(1, 8 * k * k)

    @staticmethod
    def delta_nu(nu: int, capacity: Capacity = DEFAULT_CAPACITY) -> Fraction:
        K = K_bound(nu, capacity)
        return Fraction(1, 8 * K * K)


@dataclass
class LipschitzScenario:
    """f(xi, .) for one sample xi"""
    xi: BitStream
    truncation_tol: float = 1e-6

    def __post_init__(self):
        if not self.truncation_tol > 0:
            raise DomainError(f"truncation_tol must be positive, got {self.truncation_tol}")

    @property
    def truncation_index(self) -> int:
        """K with sum_{k>K} 1/(2k^2) <= 1/(2K) <= truncation_tol"""
        return math.ceil(1 / (2 * self.truncation_tol))


@lru_cache(maxsize=16)
def _ball_arrays(K: int) -> Tuple[np.ndarray, np.ndarray]:
    ks = np.arange(1, K + 1, dtype=np.float64)
    return 1.0 / ks - 0.25 / ks ** 2, 0.5 / ks ** 2


def active_index(x: Real, closed: bool = False) -> Optional[int]:
    """k with x in B_k (or its closure when `closed`), located among floor(1/x) +- 1."""
    X = Fraction(x)
    if X <= 0:
        return None
    m = math.floor(1 / X)
    for k in range(max(1, m - 1), m + 2):
        gap = abs(X - LipGeometry.p(k))
        if gap < LipGeometry.r(k) or (closed and gap == LipGeometry.r(k)):
            return k
    return None


def eval_g(s: LipschitzScenario, x: Real) -> int:
    k = active_index(x)
    return 0 if k is None else s.xi.bit(k)


def _length_sum(bits: np.ndarray, X: float, K: int) -> Interval:
    lows, widths = _ball_arrays(K)
    lengths = np.clip(X - lows, 0.0, widths)
    value = math.fsum((bits * lengths).tolist())
    # B_k with k > K add at most sum_{k>K} 2 r_k <= 1/(2K), and never more than X
    tail = min(1.0 / (2 * K), X)
    slack = 8 * _EPS * (value + X)
    return Interval(max(value - slack, 0.0), value + tail + slack)


def eval_f(s: LipschitzScenario, x: Real) -> Interval:
    """Enclosure of f(xi, x) of width <= truncation_tol (plus rounding slack)."""
    X = max(float(x), 0.0)
    if X == 0.0:
        return Interval(0.0, 0.0)
    K = s.truncation_index
    return _length_sum(s.xi.bits(K).astype(np.float64), X, K)


@dataclass(frozen=True)
class ClarkeEnclosure:
    """Clarke subdifferential of f(xi, .) at x; flagged at the accumulation point 0"""
    interval: Interval
    accumulation_point: bool = False


def clarke_subdiff(s: LipschitzScenario, x: Real) -> ClarkeEnclosure:
    X = Fraction(x)
    if X == 0:
        return ClarkeEnclosure(Interval(0, 1), accumulation_point=True)
    k = active_index(X, closed=True)
    if k is None:
        return ClarkeEnclosure(Interval.point(0))
    bit = s.xi.bit(k)
    if abs(X - LipGeometry.p(k)) == LipGeometry.r(k):
        return ClarkeEnclosure(Interval(0, 1) if bit else Interval.point(0))
    return ClarkeEnclosure(Interval.point(bit))


def expected_f(x: Real, truncation_tol: float = 1e-6) -> Interval:
    """E f(xi, x) = (1/2) sum_k len([0, max(x,0)] cap B_k), as an enclosure."""
    X = max(float(x), 0.0)
    if X == 0.0:
        return Interval(0.0, 0.0)
    K = math.ceil(1 / (2 * truncation_tol))
    full = _length_sum(np.ones(K), X, K)
    return Interval(full.lo / 2, full.hi / 2)


def expected_grad_ball(k: int) -> Fraction:
    """E grad f(xi, y) = E bit_k(xi) = 1/2 on B(p_k, Delta_k)"""
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    return Fraction(1, 2)


def _check_ball(y: Real, k: int) -> None:
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if abs(Fraction(y) - LipGeometry.p(k)) > LipGeometry.Delta(k):
        raise DomainError(f"y={y} lies outside B(p_{k}, Delta_{k}); gradient formula not certified there")


def empirical_avg_grad(samples: Sequence[LipschitzScenario], y: Real, k: int) -> Fraction:
    """(1/nu) sum_i grad f(xi^i, y) = (1/nu) sum_i bit_k(xi^i) on B(p_k, Delta_k)"""
    if not samples:
        raise DomainError("At least one sample is required")
    _check_ball(y, k)
    return Fraction(sum(eval_g(s, y) for s in samples), len(samples))


def dnu_points(nu: int, capacity: Capacity = DEFAULT_CAPACITY) -> List[Fraction]:
    """{p_k : k <= K_bound(nu)}; f(xi, .) is C^1 on B(p, delta^nu) around each"""
    return [LipGeometry.p(k) for k in range(1, K_bound(nu, capacity) + 1)]


def gap_trial(
    streams: Sequence[BitStream],
    seed: int,
    capacity: Capacity = DEFAULT_CAPACITY,
    truncation_tol: float = 1e-6
) -> GapTrial:
    """Gap at the witness p_{k^nu} for the supplied samples."""
    nu = len(streams)
    K = K_bound(nu, capacity)
    delta = LipGeometry.delta_nu(nu, capacity)
    k = find_joint_one_bit(streams, K)
    if k is None:
        logger.warning(f"No joint one-bit among the first {K} indices (nu={nu}, seed={seed})")
        return GapTrial(seed=seed, nu=nu, K=K, delta=delta, found=False)
    scenarios = [LipschitzScenario(xi=stream, truncation_tol=truncation_tol) for stream in streams]
    y = LipGeometry.p(k)
    expected = expected_grad_ball(k)
    empirical = empirical_avg_grad(scenarios, y, k)
    gap = hausdorff(Interval.point(expected), Interval.point(empirical))
    logger.debug(f"nu={nu} seed={seed}: k={k} gap={gap}")
    return GapTrial(seed=seed, nu=nu, K=K, delta=delta, found=True, k=k, gap=gap)


def gap_experiment(nu: int, seed: int, capacity: Capacity = DEFAULT_CAPACITY) -> GapTrial:
    """Sample nu streams from `seed` and evaluate the gap."""
    K_bound(nu, capacity)
    return gap_trial(spawn_streams(seed, nu, capacity.max_bits), seed, capacity)
