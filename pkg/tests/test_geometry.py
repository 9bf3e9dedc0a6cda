import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morevis.geometry import (
    ConvexPolygon,
    GeometryError,
    area,
    box_polygon,
    centroid,
    convex_hull,
    intersection_area,
    min_distance,
    pairwise_min_distance,
    polygon_violations,
    regular_polygon,
)

UNIT_SQUARE = box_polygon(0, 0, 1, 1)


def random_convex(rng, scale=1.0, offset=(0.0, 0.0)):
    pts = rng.uniform(-scale, scale, size=(rng.integers(3, 12), 2)) + np.asarray(offset)
    try:
        return convex_hull(pts)
    except GeometryError:
        return random_convex(rng, scale, offset)


# --- area ---------------------------------------------------------------


def test_area_unit_square():
    assert area(UNIT_SQUARE) == 1.0


def test_area_triangle():
    tri = ConvexPolygon(np.array([[0, 0], [2, 0], [0, 2]], dtype=float))
    assert area(tri) == pytest.approx(2.0)


def test_area_regular_32gon():
    # closed form n/2 * sin(2*pi/n) for circumradius 1
    expected = 32 / 2 * math.sin(2 * math.pi / 32)
    assert expected == pytest.approx(3.1214, abs=1e-4)
    assert area(regular_polygon(0, 0, 1, 32)) == pytest.approx(expected, abs=1e-12)


# --- intersection_area ---------------------------------------------------


def test_intersection_offset_squares():
    q = UNIT_SQUARE.translated(0.5, 0.0)
    assert intersection_area(UNIT_SQUARE, q) == pytest.approx(0.5)


def test_intersection_identity():
    p = regular_polygon(3, -1, 2.5, 7)
    assert intersection_area(p, p) == pytest.approx(area(p))


def test_intersection_rotated_square_monte_carlo():
    # square rotated 45 deg about the shared center clips to an octagon
    c = np.array([0.5, 0.5])
    ang = 2 * np.pi * np.arange(4) / 4  # corners on the axes: 45 deg vs the unit square
    rot = ConvexPolygon(np.column_stack([c[0] + np.cos(ang) / math.sqrt(2),
                                         c[1] + np.sin(ang) / math.sqrt(2)]))
    rng = np.random.default_rng(12345)
    pts = rng.uniform(0, 1, size=(4_000_000, 2))
    inside = np.ones(len(pts), dtype=bool)
    v = rot.vertices
    for i in range(4):
        a, b = v[i], v[(i + 1) % 4]
        inside &= (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0]) >= 0
    mc = inside.mean()  # sample box is the unit square, area 1
    got = intersection_area(UNIT_SQUARE, rot)
    assert got == pytest.approx(mc, abs=1e-3)
    assert got == pytest.approx(2 * (math.sqrt(2) - 1), abs=1e-9)


def test_intersection_disjoint_and_touching():
    assert intersection_area(UNIT_SQUARE, UNIT_SQUARE.translated(5, 0)) == 0.0
    assert intersection_area(UNIT_SQUARE, UNIT_SQUARE.translated(1, 0)) == 0.0


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_intersection_bounded_by_min_area(seed):
    rng = np.random.default_rng(seed)
    p = random_convex(rng)
    q = random_convex(rng, offset=rng.uniform(-1, 1, 2))
    w = intersection_area(p, q)
    assert w <= min(area(p), area(q)) + 1e-9
    assert w == pytest.approx(intersection_area(q, p), abs=1e-9)


def test_intersection_equality_iff_containment():
    inner = box_polygon(0.25, 0.25, 0.75, 0.75)
    assert intersection_area(UNIT_SQUARE, inner) == pytest.approx(area(inner))


# --- centroid -------------------------------------------------------------


def test_centroid_unit_square():
    assert centroid(UNIT_SQUARE) == pytest.approx([0.5, 0.5])


def test_centroid_triangle():
    tri = ConvexPolygon(np.array([[0, 0], [3, 0], [0, 3]], dtype=float))
    assert centroid(tri) == pytest.approx([1.0, 1.0])


@given(st.integers(0, 10_000), st.floats(-50, 50), st.floats(-50, 50))
@settings(max_examples=40, deadline=None)
def test_centroid_translation_equivariance(seed, dx, dy):
    p = random_convex(np.random.default_rng(seed))
    assert centroid(p.translated(dx, dy)) == pytest.approx(centroid(p) + [dx, dy], abs=1e-7)


# --- min_distance ---------------------------------------------------------


def test_min_distance_offset_squares():
    assert min_distance(UNIT_SQUARE, UNIT_SQUARE.translated(3, 0)) == pytest.approx(2.0)


def test_min_distance_intersecting():
    assert min_distance(UNIT_SQUARE, UNIT_SQUARE.translated(0.5, 0.5)) == 0.0


def test_min_distance_corner_gap():
    # brute force over densely sampled boundary points as the oracle
    eps = 1e-4
    tiny = box_polygon(2, 2, 2 + eps, 2 + eps)
    ts = np.linspace(0, 1, 400)

    def boundary(p):
        v = p.vertices
        segs = [v[i] + np.outer(ts, v[(i + 1) % len(v)] - v[i]) for i in range(len(v))]
        return np.concatenate(segs)

    ba, bb = boundary(UNIT_SQUARE), boundary(tiny)
    brute = np.min(np.linalg.norm(ba[:, None, :] - bb[None, :, :], axis=2))
    got = min_distance(UNIT_SQUARE, tiny)
    assert got == pytest.approx(brute, abs=1e-3)
    assert got == pytest.approx(math.sqrt(2), abs=1e-3)


def test_min_distance_contained():
    inner = box_polygon(0.4, 0.4, 0.6, 0.6)
    assert min_distance(UNIT_SQUARE, inner) == 0.0


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_min_distance_zero_iff_contact(seed):
    rng = np.random.default_rng(seed)
    p = random_convex(rng)
    q = random_convex(rng, offset=rng.uniform(-2, 2, 2))
    d = min_distance(p, q)
    w = intersection_area(p, q)
    assert d == min_distance(q, p)
    if w > 1e-9:
        assert d == 0.0
    if d > 1e-6:
        assert w == 0.0


@given(st.integers(0, 10_000), st.floats(-20, 20), st.floats(-20, 20))
@settings(max_examples=40, deadline=None)
def test_translation_invariance(seed, dx, dy):
    rng = np.random.default_rng(seed)
    p = random_convex(rng)
    q = random_convex(rng, offset=rng.uniform(-2, 2, 2))
    pt, qt = p.translated(dx, dy), q.translated(dx, dy)
    assert intersection_area(pt, qt) == pytest.approx(intersection_area(p, q), abs=1e-7)
    assert min_distance(pt, qt) == pytest.approx(min_distance(p, q), abs=1e-7)
    assert area(pt) == pytest.approx(area(p), abs=1e-9)


# --- convex_hull ----------------------------------------------------------


def test_hull_square_with_center():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5)]
    hull = convex_hull(pts)
    assert len(hull.vertices) == 4
    assert area(hull) == pytest.approx(1.0)


def test_hull_idempotent():
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1, 1, (30, 2))
    h1 = convex_hull(pts)
    h2 = convex_hull(h1.vertices)
    assert h1 == h2


def test_hull_contains_all_points():
    rng = np.random.default_rng(42)
    r = np.sqrt(rng.uniform(0, 1, 100))
    th = rng.uniform(0, 2 * np.pi, 100)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    hull = convex_hull(pts)
    v = hull.vertices
    for pt in pts:
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            assert (b[0] - a[0]) * (pt[1] - a[1]) - (b[1] - a[1]) * (pt[0] - a[0]) >= -1e-9


def test_hull_collinear_raises():
    with pytest.raises(GeometryError):
        convex_hull([(0, 0), (1, 1), (2, 2), (3, 3)])


# --- validation helpers ----------------------------------------------------


def test_violations_clockwise():
    assert polygon_violations([[0, 0], [0, 1], [1, 1], [1, 0]]) == ["winding"]


def test_violations_self_intersecting():
    assert "non-convex" in polygon_violations([[0, 0], [1, 1], [1, 0], [0, 1]])


def test_violations_valid():
    assert polygon_violations(UNIT_SQUARE.vertices) == []


def test_constructor_rejects_bad_polygons():
    with pytest.raises(GeometryError):
        ConvexPolygon(np.array([[0, 0], [1, 0]], dtype=float))
    with pytest.raises(GeometryError):
        ConvexPolygon(np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=float))


# --- batched distances ------------------------------------------------------


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_pairwise_matches_scalar(seed):
    rng = np.random.default_rng(seed)
    polys = [random_convex(rng, offset=rng.uniform(-3, 3, 2)) for _ in range(6)]
    ia, ib = np.triu_indices(len(polys), 1)
    batch = pairwise_min_distance(polys, ia, ib)
    for k in range(len(ia)):
        assert batch[k] == pytest.approx(min_distance(polys[ia[k]], polys[ib[k]]), abs=1e-7)
