"""
Set-valued objects in dimension <= 2 and the metrics between them.

Coordinates may be floats or Fractions; with Fractions every operation is
exact, including square roots of rational squares.
"""
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import List, Sequence, Tuple, Union
import math

from .base import DomainError

Point = Tuple[Real, Real]

COLLINEAR_TOL = 1e-12


def _sqrt(value: Real) -> Real:
    """Square root, exact when `value` is the square of a rational."""
    if isinstance(value, Rational):
        value = Fraction(value)
        num, den = value.numerator, value.denominator
        root_num, root_den = math.isqrt(num), math.isqrt(den)
        if root_num * root_num == num and root_den * root_den == den:
            return Fraction(root_num, root_den)
    return math.sqrt(value)


def _sub(p: Point, q: Point) -> Point:
    return (p[0] - q[0], p[1] - q[1])


def _add(p: Point, q: Point) -> Point:
    return (p[0] + q[0], p[1] + q[1])


def _dot(p: Point, q: Point) -> Real:
    return p[0] * q[0] + p[1] * q[1]


def _cross(o: Point, a: Point, b: Point) -> Real:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _exact(*values: Real) -> bool:
    return all(isinstance(v, Rational) for v in values)


def _div(value: Real, divisor: Real) -> Real:
    """value / divisor, kept rational when both are"""
    if _exact(value, divisor):
        return Fraction(value) / Fraction(divisor)
    return value / divisor


def _scale(p: Point, divisor: int) -> Point:
    return (_div(p[0], divisor), _div(p[1], divisor))


def _turn(o: Point, a: Point, b: Point) -> int:
    """Orientation of o -> a -> b: 1 left turn, -1 right turn, 0 collinear."""
    c = _cross(o, a, b)
    if _exact(*o, *a, *b):
        return (c > 0) - (c < 0)
    # float cutoff scales with |a - o| |b - o|
    tol = COLLINEAR_TOL * math.hypot(a[0] - o[0], a[1] - o[1]) * math.hypot(b[0] - o[0], b[1] - o[1])
    return 1 if c > tol else (-1 if c < -tol else 0)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; lo == hi is a singleton"""
    lo: Real
    hi: Real

    def __post_init__(self):
        if self.lo > self.hi:
            raise DomainError(f"Interval lower end {self.lo} exceeds upper end {self.hi}")

    @classmethod
    def point(cls, value: Real) -> "Interval":
        return cls(value, value)

    @property
    def width(self) -> Real:
        return self.hi - self.lo

    def contains(self, value: Real) -> bool:
        return self.lo <= value <= self.hi

    def issubset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi


@dataclass(frozen=True)
class Segment2:
    """{base + t*dir : t in [0,1]}; dir may be zero"""
    base: Point
    dir: Point

    @classmethod
    def point(cls, p: Point) -> "Segment2":
        return cls(base=tuple(p), dir=(0, 0))

    @property
    def is_singleton(self) -> bool:
        return self.dir[0] == 0 and self.dir[1] == 0

    @property
    def end(self) -> Point:
        return _add(self.base, self.dir)

    def vertices(self) -> List[Point]:
        return [self.base] if self.is_singleton else [self.base, self.end]


def _hull(points: Sequence[Point]) -> List[Point]:
    """Monotone chain hull, counterclockwise from the lowest-x vertex, collinear points dropped."""
    unique = sorted(set((p[0], p[1]) for p in points))
    if len(unique) <= 1:
        return unique
    lower: List[Point] = []
    for p in unique:
        while len(lower) >= 2 and _turn(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: List[Point] = []
    for p in reversed(unique):
        while len(upper) >= 2 and _turn(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        return hull[:1]
    return hull


@dataclass(frozen=True)
class ConvexPolygon:
    """
    Convex polygon with counterclockwise vertices in canonical order.

    One vertex is a point and two vertices a segment. Construction always
    re-runs the hull, so equal point sets give equal instances.
    """
    vertices: Tuple[Point, ...]

    def __post_init__(self):
        if not self.vertices:
            raise DomainError("Empty polygon")
        object.__setattr__(self, "vertices", tuple(_hull(self.vertices)))

    @classmethod
    def from_points(cls, points: Sequence[Point]) -> "ConvexPolygon":
        return cls(tuple(tuple(p) for p in points))

    @classmethod
    def from_segment(cls, segment: Segment2) -> "ConvexPolygon":
        return cls(tuple(segment.vertices()))

    def edges(self) -> List[Tuple[Point, Point]]:
        n = len(self.vertices)
        if n == 1:
            return []
        if n == 2:
            return [(self.vertices[0], self.vertices[1])]
        return [(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]

    def perimeter(self) -> float:
        n = len(self.vertices)
        total = sum(float(_sqrt(_dot(_sub(b, a), _sub(b, a)))) for a, b in self.edges())
        return 2 * total if n == 2 else total

    def contains(self, p: Point) -> bool:
        if len(self.vertices) < 3:
            return dist_point(p, self) == 0
        return all(_turn(a, b, p) >= 0 for a, b in self.edges())


PlaneSet = Union[Segment2, ConvexPolygon]
SetValue = Union[Interval, Segment2, ConvexPolygon]


def _dimension(s: SetValue) -> int:
    if s is None:
        raise DomainError("Empty set")
    if isinstance(s, Interval):
        return 1
    if isinstance(s, (Segment2, ConvexPolygon)):
        return 2
    raise DomainError(f"Unsupported set type {type(s).__name__}")


def vertices_of(s: SetValue) -> List:
    """Extreme points; for an interval its endpoints"""
    if isinstance(s, Interval):
        return [s.lo] if s.lo == s.hi else [s.lo, s.hi]
    if isinstance(s, Segment2):
        return s.vertices()
    return list(s.vertices)


def _dist_point_segment(p: Point, a: Point, d: Point) -> Real:
    length2 = _dot(d, d)
    offset = _sub(p, a)
    if length2 == 0:
        return _sqrt(_dot(offset, offset))
    t = _div(_dot(offset, d), length2)
    t = min(max(t, 0), 1)
    gap = (offset[0] - t * d[0], offset[1] - t * d[1])
    return _sqrt(_dot(gap, gap))


def dist_point(p, D: SetValue) -> Real:
    """Euclidean distance from p to D"""
    if _dimension(D) == 1:
        return max(D.lo - p, p - D.hi, 0)
    if isinstance(D, Segment2):
        return _dist_point_segment(p, D.base, D.dir)
    vertices = D.vertices
    if len(vertices) == 1:
        return _dist_point_segment(p, vertices[0], (0, 0))
    if len(vertices) > 2 and D.contains(p):
        return 0
    return min(_dist_point_segment(p, a, _sub(b, a)) for a, b in D.edges())


def excess(C: SetValue, D: SetValue) -> Real:
    """
    exs(C; D) = sup_{z in C} dist(z, D).

    dist(., D) is convex, so the sup over a polytope C is attained at one
    of its vertices.
    """
    if _dimension(C) != _dimension(D):
        raise DomainError("Dimension mismatch between sets")
    return max(dist_point(v, D) for v in vertices_of(C))


def hausdorff(C: SetValue, D: SetValue) -> Real:
    """dl(C, D) = max{exs(C; D), exs(D; C)}"""
    return max(excess(C, D), excess(D, C))


def _angle(g: Point) -> float:
    return math.atan2(float(g[1]), float(g[0]))


def _zonotope_average(segments: Sequence[Segment2]) -> ConvexPolygon:
    nu = len(segments)
    center = _scale((sum(s.base[0] for s in segments), sum(s.base[1] for s in segments)), nu)
    generators = []
    for s in segments:
        if s.is_singleton:
            continue
        g = _scale(s.dir, nu)
        # [0, g] = g + [0, -g]: keep generators in the upper half plane
        if g[1] < 0 or (g[1] == 0 and g[0] < 0):
            center = _add(center, g)
            g = (-g[0], -g[1])
        generators.append(g)
    generators.sort(key=_angle)
    walk = [center]
    for g in generators:
        walk.append(_add(walk[-1], g))
    for g in generators:
        walk.append(_sub(walk[-1], g))
    return ConvexPolygon.from_points(walk)


def _polygon_sum(P: ConvexPolygon, Q: ConvexPolygon) -> ConvexPolygon:
    return ConvexPolygon.from_points([_add(p, q) for p in P.vertices for q in Q.vertices])


def minkowski_average(sets: Sequence[SetValue]) -> SetValue:
    """(1/nu) * (S_1 + ... + S_nu)"""
    if not sets:
        raise DomainError("Minkowski average of an empty list")
    dims = {_dimension(s) for s in sets}
    if len(dims) != 1:
        raise DomainError("Minkowski average needs sets of one dimension")
    nu = len(sets)
    if dims == {1}:
        return Interval(_div(sum(s.lo for s in sets), nu), _div(sum(s.hi for s in sets), nu))
    if all(isinstance(s, Segment2) for s in sets):
        return _zonotope_average(sets)
    polygons = [
        ConvexPolygon.from_segment(s) if isinstance(s, Segment2) else s for s in sets
    ]
    total = polygons[0]
    for polygon in polygons[1:]:
        total = _polygon_sum(total, polygon)
    return ConvexPolygon.from_points([_scale(v, nu) for v in total.vertices])
