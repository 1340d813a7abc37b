"""
Tests for intervals, segments, polygons and the Hausdorff metric.
"""
from fractions import Fraction
import math

import numpy as np
import pytest

from subdiff_lab.core.base import DomainError
from subdiff_lab.core.setval import (
    ConvexPolygon,
    Interval,
    Segment2,
    dist_point,
    excess,
    hausdorff,
    minkowski_average,
)

F = Fraction


def test_interval_excess_examples():
    assert excess(Interval(0, 1), Interval(0, 2)) == 0
    assert excess(Interval(0, 2), Interval(0, 1)) == 1
    assert hausdorff(Interval(0, 2), Interval(0, 1)) == 1
    assert hausdorff(Interval.point(F(1, 2)), Interval(0, 1)) == F(1, 2)


def test_interval_rejects_reversed_ends():
    with pytest.raises(DomainError):
        Interval(1, 0)


def test_dimension_mismatch_is_an_error():
    with pytest.raises(DomainError):
        hausdorff(Interval(0, 1), Segment2.point((0, 0)))
    with pytest.raises(DomainError):
        excess(None, Interval(0, 1))


def test_point_to_polygon_distance():
    square = ConvexPolygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])
    assert dist_point((F(1, 2), F(1, 2)), square) == 0
    assert dist_point((2, F(1, 2)), square) == 1
    assert dist_point((4, 5), square) == 5
    assert dist_point((4, 5), Segment2(base=(1, 1), dir=(0, 0))) == 5


def test_polygon_canonical_order():
    a = ConvexPolygon.from_points([(1, 1), (0, 0), (1, 0), (0, 1), (F(1, 2), 0)])
    b = ConvexPolygon.from_points([(0, 1), (1, 1), (0, 0), (1, 0)])
    assert a == b
    assert len(a.vertices) == 4
    assert a.perimeter() == pytest.approx(4.0)


def test_segment_hausdorff_is_exact():
    s = Segment2(base=(0, 0), dir=(F(3), F(4)))
    p = Segment2.point((0, 0))
    assert hausdorff(s, p) == 5
    assert excess(p, s) == 0


def test_point_hausdorff_matches_euclidean():
    rng = np.random.default_rng(3)
    for _ in range(100):
        a, b = rng.normal(size=2), rng.normal(size=2)
        d = hausdorff(Segment2.point(tuple(a)), Segment2.point(tuple(b)))
        assert d == pytest.approx(float(np.linalg.norm(a - b)))


def test_metric_axioms_on_random_polygons():
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        A, B, C = (
            ConvexPolygon.from_points([tuple(p) for p in rng.normal(size=(5, 2))]) for _ in range(3)
        )
        assert hausdorff(A, A) == pytest.approx(0.0, abs=1e-12)
        assert hausdorff(A, B) == pytest.approx(hausdorff(B, A))
        assert hausdorff(A, C) <= hausdorff(A, B) + hausdorff(B, C) + 1e-9


def test_minkowski_average_of_intervals():
    avg = minkowski_average([Interval(0, 1), Interval(F(1, 2), F(1, 2)), Interval(-1, 2)])
    assert avg == Interval(F(-1, 6), F(7, 6))


def test_minkowski_average_of_segments_is_a_zonotope():
    segments = [
        Segment2(base=(0, 0), dir=(2, 0)),
        Segment2(base=(0, 0), dir=(0, 2)),
    ]
    avg = minkowski_average(segments)
    assert avg == ConvexPolygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])


def test_zonotope_handles_downward_generators():
    avg = minkowski_average([
        Segment2(base=(0, 0), dir=(0, -2)),
        Segment2(base=(0, 0), dir=(-2, 0)),
    ])
    assert avg == ConvexPolygon.from_points([(0, 0), (-1, 0), (-1, -1), (0, -1)])


def test_minkowski_average_of_points():
    avg = minkowski_average([Segment2.point((F(1), F(0))), Segment2.point((F(0), F(1)))])
    assert avg.vertices == ((F(1, 2), F(1, 2)),)


def test_tiny_rational_square_keeps_its_corners():
    s = F(1, 10**7)
    square = ConvexPolygon.from_points([(0, 0), (s, 0), (s, s), (0, s)])
    assert len(square.vertices) == 4
    assert dist_point((s / 2, F(-1, 10**5)), square) == F(1, 10**5)
    assert square.contains((s / 2, s / 2))
    assert not square.contains((s / 2, -s / 10))


def test_tiny_float_square_keeps_its_corners():
    s = 2e-7
    square = ConvexPolygon.from_points([(0.0, 0.0), (s, 0.0), (s, s), (0.0, s)])
    assert len(square.vertices) == 4
    assert dist_point((s / 2, -1e-5), square) == pytest.approx(1e-5, rel=1e-12)


def test_tiny_zonotope_of_orthogonal_segments():
    for d in (F(2, 10**7), 2e-7):
        avg = minkowski_average([
            Segment2(base=(0, 0), dir=(d, 0)),
            Segment2(base=(0, 0), dir=(0, d)),
        ])
        assert len(avg.vertices) == 4
        side = d / 2
        assert hausdorff(avg, ConvexPolygon.from_points([(0, 0), (side, 0), (side, side), (0, side)])) == 0


def test_integer_inputs_average_to_fractions():
    avg = minkowski_average([Segment2.point((1, 0)), Segment2.point((0, 0))])
    assert avg.vertices == ((F(1, 2), 0),)
    assert all(isinstance(c, Fraction) for c in avg.vertices[0])

    zonotope = minkowski_average([Segment2(base=(1, 1), dir=(1, 0)), Segment2(base=(0, 0), dir=(0, 1))])
    assert all(isinstance(c, Fraction) for v in zonotope.vertices for c in v)
    assert zonotope.vertices[0] == (F(1, 2), F(1, 2))

    interval = minkowski_average([Interval(0, 1), Interval(1, 2)])
    assert interval == Interval(F(1, 2), F(3, 2))
    assert isinstance(interval.lo, Fraction) and isinstance(interval.hi, Fraction)


def test_average_of_copies_is_the_set():
    rng = np.random.default_rng(21)
    for _ in range(50):
        C = ConvexPolygon.from_points([
            (F(int(a), 7), F(int(b), 7)) for a, b in rng.integers(-20, 21, size=(6, 2))
        ])
        s = Segment2(
            base=(F(int(rng.integers(-9, 10)), 3), F(int(rng.integers(-9, 10)), 3)),
            dir=(F(int(rng.integers(1, 10)), 5), F(int(rng.integers(-9, 10)), 5)),
        )
        for nu in range(1, 6):
            assert minkowski_average([C] * nu) == C
            assert minkowski_average([s] * nu) == ConvexPolygon.from_segment(s)


def test_zonotope_has_at_most_two_vertices_per_generator():
    rng = np.random.default_rng(34)
    for _ in range(200):
        m = int(rng.integers(1, 9))
        segments = [
            Segment2(base=tuple(int(v) for v in rng.integers(-5, 6, size=2)),
                     dir=tuple(int(v) for v in rng.integers(-3, 4, size=2)))
            for _ in range(m)
        ]
        assert len(minkowski_average(segments).vertices) <= 2 * m


def test_minkowski_average_matches_pairwise_sum():
    rng = np.random.default_rng(5)
    for _ in range(20):
        segments = [
            Segment2(base=tuple(rng.normal(size=2)), dir=tuple(rng.normal(size=2))) for _ in range(5)
        ]
        zonotope = minkowski_average(segments)
        polygons = minkowski_average(
            [ConvexPolygon.from_segment(s) for s in segments[:1]] + segments[1:]
        )
        assert hausdorff(zonotope, polygons) == pytest.approx(0.0, abs=1e-9)


def test_minkowski_average_support_function():
    """h_{avg}(u) = mean_i h_{S_i}(u) for every direction u"""
    rng = np.random.default_rng(8)
    segments = [Segment2(base=tuple(rng.normal(size=2)), dir=tuple(rng.normal(size=2))) for _ in range(7)]
    avg = minkowski_average(segments)
    for theta in np.linspace(0, 2 * math.pi, 25):
        u = np.array([math.cos(theta), math.sin(theta)])
        support = max(float(np.dot(v, u)) for v in avg.vertices)
        expected = np.mean([max(float(np.dot(v, u)) for v in s.vertices()) for s in segments])
        assert support == pytest.approx(expected, abs=1e-9)


def test_minkowski_average_rejects_mixed_dimensions():
    with pytest.raises(DomainError):
        minkowski_average([Interval(0, 1), Segment2.point((0, 0))])
    with pytest.raises(DomainError):
        minkowski_average([])


def _boundary_samples(polygon, per_edge=200):
    """Points along every edge; edge starts (the vertices) included"""
    ts = np.linspace(0.0, 1.0, per_edge, endpoint=False)[:, None]
    chunks = []
    for a, b in polygon.edges():
        a, b = np.array(a, dtype=float), np.array(b, dtype=float)
        chunks.append(a + ts * (b - a))
    return np.vstack(chunks)


def _sampled_distance(points, polygon, samples):
    vertices = np.array(polygon.vertices, dtype=float)
    edges = np.roll(vertices, -1, axis=0) - vertices
    rel = points[:, None, :] - vertices[None, :, :]
    inside = ((edges[None, :, 0] * rel[:, :, 1] - edges[None, :, 1] * rel[:, :, 0]) >= -1e-12).all(axis=1)
    nearest = np.linalg.norm(points[:, None, :] - samples[None, :, :], axis=2).min(axis=1)
    return np.where(inside, 0.0, nearest)


def test_zonotope_hausdorff_matches_boundary_sampling():
    rng = np.random.default_rng(2718)
    per_edge = 200
    for _ in range(100):
        A, B = (
            minkowski_average([
                Segment2(base=tuple(rng.normal(size=2)), dir=tuple(rng.normal(size=2))) for _ in range(4)
            ])
            for _ in range(2)
        )
        sa, sb = _boundary_samples(A, per_edge), _boundary_samples(B, per_edge)
        sampled = max(_sampled_distance(sa, B, sb).max(), _sampled_distance(sb, A, sa).max())
        spacing = max(
            np.linalg.norm(np.diff(np.vstack([s, s[:1]]), axis=0), axis=1).max() for s in (sa, sb)
        )
        assert abs(sampled - float(hausdorff(A, B))) <= spacing
