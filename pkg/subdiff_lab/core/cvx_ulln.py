"""
Univariate convex uniform laws.

Piecewise-linear convex functions with their conjugates, one-sided slopes,
subdifferentials and epsilon-subdifferentials; exact sup-Hausdorff gaps
between expected and empirical subdifferentials; the bracketing levels of
the Glivenko-Cantelli argument; and the seeded convergence experiments.
"""
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import pairwise
from numbers import Real
from typing import Any, Callable, Dict, List, Optional, Protocol, Sequence, Tuple, runtime_checkable
import logging
import math

import numpy as np

from .base import DomainError, UnsupportedInputError
from .dyadic import make_generator
from .reports import ConvergenceReport, ConvergenceRow
from .setval import Interval, hausdorff, minkowski_average

logger = logging.getLogger(__name__)

INF = math.inf


def _check_direction(w: int) -> None:
    if w not in (-1, 1):
        raise DomainError(f"Direction must be -1 or +1, got {w}")


@runtime_checkable
class CertifiedConvex(Protocol):
    """
    Univariate convex function whose slope selections are linear or constant
    between consecutive knots and constant beyond the extreme knots.
    """

    def dir_deriv(self, x: Real, w: int) -> Real: ...

    def subdifferential(self, x: Real) -> Interval: ...

    def slope_limits(self) -> Tuple[Real, Real]: ...

    def knots(self) -> Tuple[Real, ...]: ...


def _value_from(breakpoints, slopes, x0, v0, x):
    """Integrate the slope sequence from x0 to x."""
    if x == x0:
        return v0
    a, b = (x0, x) if x0 < x else (x, x0)
    total = 0
    current = a
    i = bisect_right(breakpoints, a)
    while True:
        stop = breakpoints[i] if i < len(breakpoints) and breakpoints[i] < b else b
        total += slopes[i] * (stop - current)
        if stop == b:
            break
        current = stop
        i += 1
    return v0 + total if x > x0 else v0 - total


def _div(a: Real, b: Real) -> Real:
    """a / b, kept rational for integer operands"""
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


def _left_end(vertices, values, segment_slopes, left_tail, right_tail, level):
    """
    inf {x : f(x) <= level} for a convex PWL f given by its finite vertices.

    left_tail / right_tail are the slopes of unbounded end pieces, or None
    when the domain is closed on that side. Returns None for an empty set.
    """
    for q, value in enumerate(values):
        if value <= level:
            break
    else:
        if right_tail is not None and right_tail < 0:
            return vertices[-1] + _div(level - values[-1], right_tail)
        if left_tail is not None and left_tail > 0:
            return -INF
        return None
    if q == 0:
        if left_tail is None:
            return vertices[0]
        if left_tail >= 0:
            return -INF
        return vertices[0] + _div(level - values[0], left_tail)
    return vertices[q] + _div(level - values[q], segment_slopes[q - 1])


@dataclass(frozen=True)
class PiecewiseLinearConvex:
    """
    Convex piecewise-linear function on a closed interval domain (+inf outside).

    slopes[i] holds on the i-th piece, between breakpoints[i-1] and
    breakpoints[i]. The function is fixed by the value at `anchor`.
    Instances are canonical: breakpoints with no slope change are merged and
    the anchor moves to the first breakpoint (else a finite domain end, else
    0), so equal functions compare equal.
    """
    breakpoints: Tuple[Real, ...]
    slopes: Tuple[Real, ...]
    anchor: Tuple[Real, Real]
    domain: Tuple[Real, Real] = (-INF, INF)

    def __post_init__(self):
        bps = tuple(self.breakpoints)
        slopes = tuple(self.slopes)
        lo, hi = self.domain
        x0, v0 = self.anchor
        if len(slopes) != len(bps) + 1:
            raise DomainError("Need exactly one more slope than breakpoints")
        if lo > hi:
            raise DomainError(f"Empty domain [{lo}, {hi}]")
        if not lo <= x0 <= hi or not math.isfinite(x0):
            raise DomainError(f"Anchor {x0} lies outside the domain")
        if any(not math.isfinite(s) for s in slopes):
            raise DomainError("Slopes must be finite")
        if any(b <= a for a, b in pairwise(bps)):
            raise DomainError("Breakpoints must be strictly increasing")
        if bps and not (lo < bps[0] and bps[-1] < hi):
            raise DomainError("Breakpoints must lie inside the domain")
        if any(b < a for a, b in pairwise(slopes)):
            raise DomainError("Slopes must be non-decreasing for a convex function")

        if lo == hi:
            object.__setattr__(self, "breakpoints", ())
            object.__setattr__(self, "slopes", (0,))
            object.__setattr__(self, "anchor", (lo, v0))
            return
        keep = [i for i in range(len(bps)) if slopes[i] != slopes[i + 1]]
        merged_bps = tuple(bps[i] for i in keep)
        merged_slopes = (slopes[0],) + tuple(slopes[i + 1] for i in keep)
        if merged_bps:
            xc = merged_bps[0]
        elif math.isfinite(lo):
            xc = lo
        elif math.isfinite(hi):
            xc = hi
        else:
            xc = 0
        vc = _value_from(merged_bps, merged_slopes, x0, v0, xc)
        object.__setattr__(self, "breakpoints", merged_bps)
        object.__setattr__(self, "slopes", merged_slopes)
        object.__setattr__(self, "anchor", (xc, vc))

    @classmethod
    def affine(cls, slope: Real, intercept: Real = 0) -> "PiecewiseLinearConvex":
        return cls((), (slope,), (0, intercept))

    @classmethod
    def average(
        cls,
        functions: Sequence["PiecewiseLinearConvex"],
        weights: Optional[Sequence[Real]] = None
    ) -> "PiecewiseLinearConvex":
        """sum_i w_i f_i (default w_i = 1/n), assembled from slope jumps"""
        if not functions:
            raise DomainError("Average of an empty list")
        if weights is None:
            weights = [Fraction(1, len(functions))] * len(functions)
        if len(weights) != len(functions):
            raise DomainError("One weight per function is required")
        domain = functions[0].domain
        if any(f.domain != domain for f in functions):
            raise DomainError("Averaged functions must share one domain")
        jumps: Dict[Real, Real] = {}
        initial = 0
        for f, w in zip(functions, weights):
            initial += w * f.slopes[0]
            for b, (left, right) in zip(f.breakpoints, pairwise(f.slopes)):
                jumps[b] = jumps.get(b, 0) + w * (right - left)
        bps = sorted(jumps)
        slopes = [initial]
        for b in bps:
            slopes.append(slopes[-1] + jumps[b])
        xc = bps[0] if bps else functions[0].anchor[0]
        value = sum(w * f.value(xc) for f, w in zip(functions, weights))
        return cls(tuple(bps), tuple(slopes), (xc, value), domain)

    @cached_property
    def _knot_values(self) -> Tuple[Real, ...]:
        values = [self.anchor[1]] if self.breakpoints else []
        for (a, b), slope in zip(pairwise(self.breakpoints), self.slopes[1:]):
            values.append(values[-1] + slope * (b - a))
        return tuple(values)

    def _in_domain(self, x: Real) -> bool:
        return self.domain[0] <= x <= self.domain[1]

    def _require_domain(self, x: Real) -> None:
        if not self._in_domain(x):
            raise DomainError(f"x={x} lies outside the domain {self.domain}")

    def value(self, x: Real) -> Real:
        if not self._in_domain(x):
            return INF
        bps = self.breakpoints
        if not bps:
            return self.anchor[1] + self.slopes[0] * (x - self.anchor[0])
        i = bisect_right(bps, x)
        if i == 0:
            return self.anchor[1] + self.slopes[0] * (x - bps[0])
        return self._knot_values[i - 1] + self.slopes[i] * (x - bps[i - 1])

    __call__ = value

    def slope_right(self, x: Real) -> Real:
        self._require_domain(x)
        if x == self.domain[1]:
            return INF
        return self.slopes[bisect_right(self.breakpoints, x)]

    def slope_left(self, x: Real) -> Real:
        self._require_domain(x)
        if x == self.domain[0]:
            return -INF
        return self.slopes[bisect_left(self.breakpoints, x)]

    def dir_deriv(self, x: Real, w: int) -> Real:
        """f'(x; w)"""
        _check_direction(w)
        return self.slope_right(x) if w == 1 else -self.slope_left(x)

    def subdifferential(self, x: Real) -> Interval:
        return Interval(self.slope_left(x), self.slope_right(x))

    def slope_limits(self) -> Tuple[Real, Real]:
        return self.slopes[0], self.slopes[-1]

    def knots(self) -> Tuple[Real, ...]:
        return self.breakpoints

    def lipschitz_constant(self) -> Real:
        return max(abs(self.slopes[0]), abs(self.slopes[-1]))

    def tilt(self, s: Real) -> "PiecewiseLinearConvex":
        """x -> f(x) - s x"""
        xc, vc = self.anchor
        return PiecewiseLinearConvex(
            self.breakpoints, tuple(t - s for t in self.slopes), (xc, vc - s * xc), self.domain
        )

    def shift(self, c: Real) -> "PiecewiseLinearConvex":
        """x -> f(x) + c"""
        xc, vc = self.anchor
        return PiecewiseLinearConvex(self.breakpoints, self.slopes, (xc, vc + c), self.domain)

    def mirror(self) -> "PiecewiseLinearConvex":
        """x -> f(-x)"""
        xc, vc = self.anchor
        lo, hi = self.domain
        return PiecewiseLinearConvex(
            tuple(-b for b in reversed(self.breakpoints)),
            tuple(-s for s in reversed(self.slopes)),
            (-xc, vc),
            (-hi, -lo),
        )

    def conjugate(self) -> "PiecewiseLinearConvex":
        """
        f*(s) = sup_x s x - f(x).

        Slopes of f become breakpoints of f* and breakpoints become slopes.
        A finite domain end adds an unbounded piece of slope equal to that
        end; an infinite one closes the conjugate domain at the extreme slope.
        """
        lo, hi = self.domain
        bps, slopes = self.breakpoints, self.slopes
        if lo == hi:
            return PiecewiseLinearConvex((), (lo,), (0, -self.anchor[1]))
        # (slope of f*, left end, right end) for each piece of f*
        pieces: List[Tuple[Real, Real, Real]] = []
        if math.isfinite(lo):
            pieces.append((lo, -INF, slopes[0]))
        for j, b in enumerate(bps, start=1):
            pieces.append((b, slopes[j - 1], slopes[j]))
        if math.isfinite(hi):
            pieces.append((hi, slopes[-1], INF))
        s0 = slopes[0]
        if bps:
            x_star = bps[0]
        elif math.isfinite(lo):
            x_star = lo
        elif math.isfinite(hi):
            x_star = hi
        else:
            x_star = self.anchor[0]
        anchor = (s0, s0 * x_star - self.value(x_star))
        if not pieces:
            return PiecewiseLinearConvex((), (0,), anchor, (s0, s0))
        return PiecewiseLinearConvex(
            tuple(piece[2] for piece in pieces[:-1]),
            tuple(piece[0] for piece in pieces),
            anchor,
            (pieces[0][1], pieces[-1][2]),
        )

    def _vertices(self):
        lo, hi = self.domain
        bps, slopes = self.breakpoints, self.slopes
        if lo == hi:
            return [lo], [self.anchor[1]], [], None, None
        vertices = list(bps)
        first = 1
        last = len(bps) - 1
        if math.isfinite(lo):
            vertices.insert(0, lo)
            first = 0
        if math.isfinite(hi):
            vertices.append(hi)
            last = len(bps)
        if not vertices:
            vertices = [self.anchor[0]]
        segment_slopes = list(slopes[first:last + 1])
        left_tail = None if math.isfinite(lo) else slopes[0]
        right_tail = None if math.isfinite(hi) else slopes[-1]
        values = [self.value(v) for v in vertices]
        return vertices, values, segment_slopes, left_tail, right_tail

    def min_value(self) -> Real:
        vertices, values, _, left_tail, right_tail = self._vertices()
        if (left_tail is not None and left_tail > 0) or (right_tail is not None and right_tail < 0):
            return -INF
        return min(values)

    def sublevel(self, level: Real) -> Optional[Interval]:
        """{x : f(x) <= level}, or None when empty"""
        vertices, values, segment_slopes, left_tail, right_tail = self._vertices()
        left = _left_end(vertices, values, segment_slopes, left_tail, right_tail, level)
        if left is None:
            return None
        right = _left_end(
            [-v for v in reversed(vertices)],
            values[::-1],
            [-s for s in reversed(segment_slopes)],
            None if right_tail is None else -right_tail,
            None if left_tail is None else -left_tail,
            level,
        )
        return Interval(left, -right)


def dir_deriv(f: CertifiedConvex, x: Real, w: int) -> Real:
    _check_direction(w)
    return f.dir_deriv(x, w)


def subdiff_interval(f: CertifiedConvex, x: Real) -> Interval:
    """[-f'(x;-1), f'(x;+1)]"""
    return f.subdifferential(x)


def legendre_transform(f: PiecewiseLinearConvex) -> PiecewiseLinearConvex:
    return f.conjugate()


def eps_subdiff(
    f: PiecewiseLinearConvex,
    x: Real,
    epsilon: Real,
    conjugate: Optional[PiecewiseLinearConvex] = None
) -> Interval:
    """
    {s : f(x) + f*(s) - s x <= epsilon}.

    The left side is convex PWL in s with minimum 0 (Fenchel-Young), so the
    set is one of its sublevel sets. The level is taken relative to the
    computed minimum, which makes epsilon = 0 return the subdifferential
    exactly. Pass `conjugate` to reuse f* across many x.
    """
    if epsilon < 0:
        raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
    if not f._in_domain(x):
        raise DomainError(f"x={x} lies outside the domain {f.domain}")
    conjugate = conjugate if conjugate is not None else f.conjugate()
    phi = conjugate.tilt(x).shift(f.value(x))
    return phi.sublevel(phi.min_value() + epsilon)


def sum_rule_gap(functions: Sequence[PiecewiseLinearConvex], x: Real, epsilon: Real) -> Real:
    """dl(d^eps of the average, average of the d^eps); zero when epsilon = 0"""
    average = PiecewiseLinearConvex.average(functions)
    parts = [eps_subdiff(f, x, epsilon) for f in functions]
    return hausdorff(eps_subdiff(average, x, epsilon), minkowski_average(parts))


@dataclass(frozen=True)
class MedianExpectation:
    """
    E f(xi, .) for f(xi, x) = max{x - xi1, 0} + max{xi2 - x, 0},
    xi1 uniform on [0, 1] and xi2 = 2: x^2/2 on [0, 1] plus a kink at 2.
    """
    kink: Real = 2

    @staticmethod
    def _ramp(x: Real) -> Real:
        return min(max(x, 0), 1)

    def value(self, x: Real) -> Real:
        if x <= 0:
            ramp_part = 0
        elif x <= 1:
            ramp_part = x * x / 2
        else:
            ramp_part = x - Fraction(1, 2)
        return ramp_part + max(self.kink - x, 0)

    def slope_right(self, x: Real) -> Real:
        return self._ramp(x) - (1 if x < self.kink else 0)

    def slope_left(self, x: Real) -> Real:
        return self._ramp(x) - (1 if x <= self.kink else 0)

    def dir_deriv(self, x: Real, w: int) -> Real:
        _check_direction(w)
        return self.slope_right(x) if w == 1 else -self.slope_left(x)

    def subdifferential(self, x: Real) -> Interval:
        return Interval(self.slope_left(x), self.slope_right(x))

    def slope_limits(self) -> Tuple[Real, Real]:
        return -1, 1

    def knots(self) -> Tuple[Real, ...]:
        return (0, 1, self.kink)


@dataclass(frozen=True)
class MirroredConvex:
    """x -> h(-x) for any certified h"""
    base: CertifiedConvex

    def dir_deriv(self, x: Real, w: int) -> Real:
        return self.base.dir_deriv(-x, -w)

    def subdifferential(self, x: Real) -> Interval:
        inner = self.base.subdifferential(-x)
        return Interval(-inner.hi, -inner.lo)

    def slope_limits(self) -> Tuple[Real, Real]:
        lower, upper = self.base.slope_limits()
        return -upper, -lower

    def knots(self) -> Tuple[Real, ...]:
        return tuple(sorted(-t for t in self.base.knots()))


def sup_hausdorff_gap(
    expected: CertifiedConvex,
    empirical: CertifiedConvex,
    domain: Optional[Tuple[Real, Real]] = None
) -> Real:
    """
    sup_x dl(dE(x), d_emp(x)) over `domain` (the whole line when None).

    Between merged knots both subdifferentials are singletons moving
    linearly, so the sup is reached at one-sided limits at the knots, which
    are the endpoints of the subdifferentials there. Beyond the extreme
    knots both are constant at the slope limits.
    """
    for name, f in (("expected", expected), ("empirical", empirical)):
        if not isinstance(f, CertifiedConvex):
            raise UnsupportedInputError(
                f"{name} subdifferential has no certified piecewise-monotone structure: {type(f).__name__}"
            )
    knots = set(expected.knots()) | set(empirical.knots())
    if domain is None:
        points = sorted(knots)
        e_lo, e_hi = expected.slope_limits()
        m_lo, m_hi = empirical.slope_limits()
        gap = max(abs(e_lo - m_lo), abs(e_hi - m_hi))
    else:
        a, b = domain
        if a > b:
            raise DomainError(f"Empty domain [{a}, {b}]")
        points = [a] + sorted(t for t in knots if a < t < b) + ([b] if b != a else [])
        gap = 0
    for x in points:
        gap = max(gap, hausdorff(expected.subdifferential(x), empirical.subdifferential(x)))
    return gap


@dataclass
class ScenarioDistribution:
    """
    Law of xi together with the scenario map xi -> f(xi, .).

    Discrete laws carry atoms and probabilities; continuous ones a sampler.
    `expected_function` is E f(xi, .) in certified closed form.
    """
    name: str
    kind: str
    scenario: Callable[[Any], PiecewiseLinearConvex]
    expected_function: CertifiedConvex
    mean_lipschitz: Real
    atoms: Tuple[Any, ...] = ()
    probabilities: Tuple[Real, ...] = ()
    sampler: Optional[Callable[[np.random.Generator, int], Sequence[Any]]] = None
    window: Optional[Tuple[Real, Real]] = None

    KINDS = ("continuous-uniform", "discrete")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DomainError(f"Unknown distribution kind: {self.kind}")
        if self.kind == "discrete":
            if not self.atoms or len(self.atoms) != len(self.probabilities):
                raise DomainError("A discrete distribution needs one probability per atom")
            if any(p < 0 for p in self.probabilities):
                raise DomainError("Probabilities must be nonnegative")
            if abs(sum(self.probabilities) - 1) > 1e-12:
                raise DomainError(f"Probabilities sum to {sum(self.probabilities)}, not 1")
        elif self.sampler is None:
            raise DomainError("A continuous distribution needs a sampler")

    def envelope_means(self, w: int = 1) -> Tuple[Real, Real]:
        """(E l, E u): means of the slope limits of f(xi, .), read in direction w"""
        _check_direction(w)
        lower, upper = self.expected_function.slope_limits()
        return (lower, upper) if w == 1 else (-upper, -lower)

    def empirical(self, generator: np.random.Generator, nu: int) -> PiecewiseLinearConvex:
        """(1/nu) sum_i f(xi^i, .) for nu fresh samples"""
        if nu < 1:
            raise DomainError(f"nu must be positive, got {nu}")
        if self.kind == "discrete":
            counts = generator.multinomial(nu, np.asarray(self.probabilities, dtype=np.float64))
            drawn = [(atom, int(c)) for atom, c in zip(self.atoms, counts) if c > 0]
            return PiecewiseLinearConvex.average(
                [self.scenario(atom) for atom, _ in drawn],
                [Fraction(c, nu) for _, c in drawn],
            )
        return PiecewiseLinearConvex.average([self.scenario(xi) for xi in self.sampler(generator, nu)])


def _hinge_pair(xi1: Real, kink: Real = 2) -> PiecewiseLinearConvex:
    return PiecewiseLinearConvex((xi1, kink), (-1, 0, 1), (kink, kink - xi1))


def median_example() -> ScenarioDistribution:
    """f(xi, x) = max{x - xi1, 0} + max{2 - x, 0}, xi1 ~ U[0,1], on the window [0, 3]"""
    return ScenarioDistribution(
        name="median",
        kind="continuous-uniform",
        scenario=_hinge_pair,
        expected_function=MedianExpectation(),
        mean_lipschitz=1,
        sampler=lambda generator, nu: generator.random(nu).tolist(),
        window=(0, 3),
    )


def _hinge(xi: Real) -> PiecewiseLinearConvex:
    return PiecewiseLinearConvex((xi,), (0, 1), (xi, 0))


def discrete_distribution(
    functions: Sequence[PiecewiseLinearConvex],
    probabilities: Sequence[Real],
    name: str = "discrete",
    window: Optional[Tuple[Real, Real]] = None
) -> ScenarioDistribution:
    """Finitely many scenario functions; E f is their probability-weighted average"""
    functions = tuple(functions)
    probabilities = tuple(probabilities)
    if len(functions) != len(probabilities):
        raise DomainError("A discrete distribution needs one probability per atom")
    return ScenarioDistribution(
        name=name,
        kind="discrete",
        scenario=lambda f: f,
        expected_function=PiecewiseLinearConvex.average(functions, probabilities),
        mean_lipschitz=sum(p * f.lipschitz_constant() for f, p in zip(functions, probabilities)),
        atoms=functions,
        probabilities=probabilities,
        window=window,
    )


def two_atom_example() -> ScenarioDistribution:
    """f(xi, x) = max{x - xi, 0} with xi in {1/4, 3/4} equiprobable, on the window [0, 1]"""
    return discrete_distribution(
        [_hinge(0.25), _hinge(0.75)], [0.5, 0.5], name="two-atom", window=(0.0, 1.0)
    )


def min_level(h: CertifiedConvex, target: Real) -> Real:
    """min {t : h'(t; +1) >= target}, attained by right-continuity"""
    lower_limit, _ = h.slope_limits()
    if lower_limit >= target:
        return -INF
    previous = None
    for t in sorted(h.knots()):
        left_limit = h.subdifferential(t).lo
        if previous is not None and left_limit >= target:
            t_prev, u_prev = previous
            return t_prev + (target - u_prev) * (t - t_prev) / (left_limit - u_prev)
        upper = h.dir_deriv(t, 1)
        if upper >= target:
            return t
        previous = (t, upper)
    return INF


@dataclass(frozen=True)
class BracketDiagnostic:
    """
    Levels t_1..t_N of the bracketing construction and the L1 widths of the
    N + 1 brackets. mean_l and mean_u are the envelope means in the frame
    where t -> f'(t; w) is non-decreasing (mirrored when w = -1).
    """
    epsilon: Real
    w: int
    levels: Tuple[Real, ...]
    N: int
    bound: Real
    widths: Tuple[Real, ...] = ()
    mean_l: Real = 0
    mean_u: Real = 0

    @property
    def within_bound(self) -> bool:
        return self.N <= self.bound


def bracketing_diagnostic(dist: ScenarioDistribution, epsilon: Real, w: int = 1) -> BracketDiagnostic:
    """Bracketing levels for x -> f'(xi, x; w); w = -1 is handled on the mirrored function."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    _check_direction(w)
    h = dist.expected_function if w == 1 else MirroredConvex(dist.expected_function)
    mean_l, mean_u = dist.envelope_means(w)
    bound = 1 + 2 * dist.mean_lipschitz / epsilon
    if mean_u == mean_l:
        return BracketDiagnostic(epsilon, w, (), 0, bound, (), mean_l, mean_u)
    top = mean_u - epsilon / 2
    levels: List[Real] = []
    n = 1
    while True:
        t = min_level(h, min(top, mean_l + n * epsilon))
        # a jump of E f' can clear several targets at one level
        if not levels or t != levels[-1]:
            levels.append(t)
        if t == -INF or h.dir_deriv(t, 1) >= top:
            break
        n += 1
        if n > bound + 1:
            raise UnsupportedInputError("Bracketing levels did not close within 1 + 2E[L]/epsilon")

    def upper_at(t):
        return mean_l if t == -INF else h.dir_deriv(t, 1)

    def left_limit_at(t):
        return mean_l if t == -INF else h.subdifferential(t).lo

    widths = [left_limit_at(levels[0]) - mean_l]
    widths += [left_limit_at(b) - upper_at(a) for a, b in pairwise(levels)]
    widths.append(mean_u - upper_at(levels[-1]))
    if w == -1:
        levels = [-t for t in levels]
    diagnostic = BracketDiagnostic(epsilon, w, tuple(levels), len(levels), bound, tuple(widths), mean_l, mean_u)
    logger.debug(f"Bracketing {dist.name} eps={epsilon} w={w}: N={diagnostic.N} bound={bound}")
    return diagnostic


def _window(dist: ScenarioDistribution, domain: Optional[Tuple[Real, Real]]) -> Optional[Tuple[Real, Real]]:
    return domain if domain is not None else dist.window


def ulln_trial(
    dist: ScenarioDistribution,
    nu: int,
    seed: int,
    domain: Optional[Tuple[Real, Real]] = None
) -> ConvergenceRow:
    """sup_x dl between expected and empirical subdifferentials for one seeded draw"""
    empirical = dist.empirical(make_generator(seed), nu)
    gap = sup_hausdorff_gap(dist.expected_function, empirical, _window(dist, domain))
    return ConvergenceRow(nu=nu, seed=seed, gap=float(gap))


def eps_grid(
    domain: Tuple[Real, Real],
    grid_points: int,
    extra: Sequence[Real] = ()
) -> np.ndarray:
    """Uniform grid on `domain` refined by the breakpoints inside it"""
    a, b = float(domain[0]), float(domain[1])
    inside = [float(t) for t in extra if a < t < b]
    return np.unique(np.concatenate([np.linspace(a, b, grid_points), np.asarray(inside, dtype=np.float64)]))


def eps_modulus(f: PiecewiseLinearConvex, epsilon: Real) -> float:
    """Continuity modulus 2 L R / epsilon of x -> d^eps f(x) in Hausdorff distance"""
    lower, upper = f.slope_limits()
    return float(2 * f.lipschitz_constant() * (upper - lower) / epsilon)


def eps_ulln_trial(
    dist: ScenarioDistribution,
    epsilon: Real,
    nu: int,
    seed: int,
    domain: Optional[Tuple[Real, Real]] = None,
    grid_points: int = 2001
) -> ConvergenceRow:
    """Grid sup of dl(d^eps E f, d^eps f_nu) with its continuity error bound"""
    if dist.kind != "discrete":
        raise UnsupportedInputError("Epsilon-subdifferential laws need a discrete distribution")
    if not epsilon > 0:
        raise DomainError("ε must be positive; ε=0 is the counterexample regime")
    window = _window(dist, domain)
    if window is None:
        raise DomainError("A bounded domain is required for the epsilon grid")
    if grid_points < 2:
        raise DomainError(f"grid_points must be at least 2, got {grid_points}")
    expected = dist.expected_function
    empirical = dist.empirical(make_generator(seed), nu)
    expected_star, empirical_star = expected.conjugate(), empirical.conjugate()
    grid = eps_grid(window, grid_points, expected.knots() + empirical.knots())
    gap = 0.0
    for x in grid.tolist():
        gap = max(gap, float(hausdorff(
            eps_subdiff(expected, x, epsilon, expected_star),
            eps_subdiff(empirical, x, epsilon, empirical_star),
        )))
    spacing = float(np.max(np.diff(grid))) if len(grid) > 1 else 0.0
    error_bound = (eps_modulus(expected, epsilon) + eps_modulus(empirical, epsilon)) * spacing / 2
    return ConvergenceRow(nu=nu, seed=seed, gap=gap, grid_error_bound=error_bound)


def summarize_convergence(rows: Sequence[ConvergenceRow]) -> Dict[str, Any]:
    """Per-nu median gaps, the non-increasing check and the last/first median ratio"""
    by_nu: Dict[int, List[float]] = {}
    for row in rows:
        by_nu.setdefault(row.nu, []).append(row.gap)
    per_nu = [
        {
            "nu": nu,
            "trials": len(gaps),
            "median_gap": float(np.median(gaps)),
            "max_gap": float(np.max(gaps)),
        }
        for nu, gaps in sorted(by_nu.items())
    ]
    medians = [entry["median_gap"] for entry in per_nu]
    summary: Dict[str, Any] = {
        "per_nu": per_nu,
        "non_increasing": all(b <= a for a, b in pairwise(medians)),
        "last_first_ratio": medians[-1] / medians[0] if medians and medians[0] > 0 else None,
    }
    bounds = [row.grid_error_bound for row in rows if row.grid_error_bound is not None]
    if bounds:
        summary["max_grid_error_bound"] = max(bounds)
    return summary


def _indexed(rows: List[ConvergenceRow]) -> List[ConvergenceRow]:
    for index, row in enumerate(rows):
        row.trial = index
    return rows


def ulln_experiment(
    dist: ScenarioDistribution,
    nu_list: Sequence[int],
    seeds: Sequence[int],
    domain: Optional[Tuple[Real, Real]] = None
) -> ConvergenceReport:
    """Sequential driver: one trial per (nu, seed)"""
    rows = _indexed([ulln_trial(dist, nu, seed, domain) for nu in nu_list for seed in seeds])
    return ConvergenceReport(
        experiment="ulln-1d",
        config={"distribution": dist.name, "nu_list": list(nu_list), "seeds": list(seeds),
                "domain": list(_window(dist, domain) or ())},
        rows=rows,
        summary=summarize_convergence(rows),
    )


def eps_ulln_experiment(
    dist: ScenarioDistribution,
    epsilon: Real,
    nu_list: Sequence[int],
    seeds: Sequence[int],
    domain: Optional[Tuple[Real, Real]] = None,
    grid_points: int = 2001
) -> ConvergenceReport:
    """Sequential driver for the fixed-epsilon law"""
    if not epsilon > 0:
        raise DomainError("ε must be positive; ε=0 is the counterexample regime")
    rows = _indexed([
        eps_ulln_trial(dist, epsilon, nu, seed, domain, grid_points) for nu in nu_list for seed in seeds
    ])
    return ConvergenceReport(
        experiment="eps-ulln",
        config={"distribution": dist.name, "epsilon": epsilon, "nu_list": list(nu_list),
                "seeds": list(seeds), "domain": list(_window(dist, domain) or ()),
                "grid_points": grid_points},
        rows=rows,
        summary=summarize_convergence(rows),
    )
