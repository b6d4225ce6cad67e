import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcmsurvey.geometry import (
    ConvexQuad,
    DomainSpec,
    GeometryError,
    InflationBreaksConvexity,
    Rect,
    Triangle,
    area,
    contains,
    inflate,
    map_unit_to_rect,
    rect_to_unit,
    scale_shape,
    triangulate,
)

UNIT_QUAD = ConvexQuad(((0, 0), (1, 0), (1, 1), (0, 1)))


def test_areas():
    assert area(Rect((5, 5), (25, 25))) == 400.0
    assert area(Triangle(((0, 0), (1, 0), (0, 1)))) == 0.5
    t1, t2 = triangulate(UNIT_QUAD)
    assert area(UNIT_QUAD) == pytest.approx(1.0, rel=1e-15)
    assert area(t1) + area(t2) == pytest.approx(area(UNIT_QUAD), rel=1e-12)


def test_invalid_shapes():
    with pytest.raises(GeometryError):
        Rect((1, 1), (1, 2))
    with pytest.raises(GeometryError):
        Triangle(((0, 0), (0, 1), (1, 0)))  # clockwise
    with pytest.raises(GeometryError):
        ConvexQuad(((0, 0), (1, 0), (0.2, 0.2), (0, 1)))  # reflex vertex
    with pytest.raises(GeometryError):
        DomainSpec(Rect((5, 5), (25, 25)), (0.0, 0.2))
    with pytest.raises(GeometryError):
        DomainSpec(Rect((5, 5), (25, 25)), (2.0, 0.2))  # not small vs extent


def test_inflate_three_times_matches_end_domain():
    d = DomainSpec(Rect((5, 5), (25, 25)), (0.2, 0.2))
    for _ in range(3):
        d = inflate(d)
    np.testing.assert_allclose(d.shape.lo, (4.4, 4.4), atol=1e-12)
    np.testing.assert_allclose(d.shape.hi, (25.6, 25.6), atol=1e-12)


def test_quad_inflation_agrees_with_rect_rule():
    q = DomainSpec(ConvexQuad(((5, 5), (25, 5), (25, 25), (5, 25))), (0.2, 0.2))
    r = DomainSpec(Rect((5, 5), (25, 25)), (0.2, 0.2))
    qi, ri = inflate(q), inflate(r)
    np.testing.assert_allclose(qi.shape.as_array().min(axis=0), ri.shape.lo)
    np.testing.assert_allclose(qi.shape.as_array().max(axis=0), ri.shape.hi)


def test_quad_inflation_can_break_convexity():
    # v0 and v2 both sit left of the centroid, so the v0-v2 side folds inward
    q = ConvexQuad(((8, 3), (10, 10), (8, 7), (7, 0)))
    with pytest.raises(InflationBreaksConvexity):
        inflate(DomainSpec(q, (0.3, 0.3)))


def test_small_inflation_limit():
    d = DomainSpec(Rect((5, 5), (25, 25)), (1e-12, 1e-12))
    np.testing.assert_allclose(inflate(d).shape.lo, (5, 5), atol=1e-11)


def test_triangulate_diagonal():
    t1, t2 = triangulate(UNIT_QUAD)
    assert t1.vertices == ((0, 0), (1, 0), (1, 1))
    assert t2.vertices == ((0, 0), (1, 1), (0, 1))


def test_contains_and_map():
    r = Rect((5, 5), (25, 25))
    assert contains(r, (15, 15))
    assert not contains(r, (4.9, 15))
    assert contains(r, (5, 25))  # closed
    np.testing.assert_allclose(map_unit_to_rect((0, 0), r), (5, 5))
    np.testing.assert_allclose(map_unit_to_rect((0.5, 0.5), r), (15, 15))
    np.testing.assert_allclose(map_unit_to_rect((0.25, 0.75), Rect((0, 10), (4, 20))), (1, 17.5))


def test_scale_shape_round_trip():
    d = DomainSpec(ConvexQuad(((5, 5), (25, 6), (24, 25), (4, 24))), (0.2, 0.3))
    back = scale_shape(scale_shape(d, 100.0), 0.01)
    np.testing.assert_allclose(back.shape.as_array(), d.shape.as_array(), rtol=1e-14)
    np.testing.assert_allclose(back.inflation, d.inflation, rtol=1e-14)


coord = st.floats(-1e3, 1e3, allow_nan=False)
unit = st.floats(0, 1, exclude_max=True)


@st.composite
def rects(draw):
    x0, y0 = draw(coord), draw(coord)
    w, h = draw(st.floats(1e-2, 1e3)), draw(st.floats(1e-2, 1e3))
    return Rect((x0, y0), (x0 + w, y0 + h))


@given(rects(), st.lists(st.tuples(unit, unit), min_size=1, max_size=20), st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_rect_properties(rect, us, n):
    u = np.array(us)
    x = map_unit_to_rect(u, rect)
    assert np.all(contains(rect, x))
    tol = 1e-12 * max(1.0, *np.abs(rect.lo)) / min(rect.extent)
    np.testing.assert_allclose(rect_to_unit(x, rect), u, atol=tol)
    xi = tuple(0.05 * rect.extent)
    d = DomainSpec(rect, xi)
    big = d
    for _ in range(n):
        big = inflate(big)
    assert np.all(contains(big, x))
    np.testing.assert_allclose(big.shape.lo, np.array(rect.lo) - n * np.array(xi), rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(big.shape.hi, np.array(rect.hi) + n * np.array(xi), rtol=1e-12, atol=1e-9)


@st.composite
def quads(draw):
    # vertices on a circle at increasing angles, one per quadrant: always strictly convex
    cx, cy, rad = draw(coord), draw(coord), draw(st.floats(1.0, 100.0))
    angles = [draw(st.floats(0.1, 1.4)) + k * np.pi / 2 for k in range(4)]
    return ConvexQuad(tuple((cx + rad * np.cos(a), cy + rad * np.sin(a)) for a in angles))


@given(quads())
@settings(max_examples=60, deadline=None)
def test_quad_partition(q):
    t1, t2 = triangulate(q)
    assert area(t1) > 0 and area(t2) > 0
    assert area(t1) + area(t2) == pytest.approx(area(q), rel=1e-12)
