"""Tests for closed curves, hulls, crosscuts and bumping curves."""

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from shapely.geometry import LineString, MultiPoint, Point, Polygon
from shapely.ops import unary_union

from conftest import square_vertices, star_polygon
from curve import (OrientedClosedCurve, PolylinePath, bumping_curve, contains, crosscut_components,
                   hull_region, named_continuum, region_of, shadow_of, topological_hull, vector_hull)
from errors import BadResolution, FixedPointNearX, NotCounterclockwise, NotSimple, OnCurve, OutsideWindow
from geom import Window

WINDOW = Window(-2.0, -2.0, 2.0, 2.0)


def test_curve_must_be_counterclockwise_and_simple():
    with pytest.raises(NotCounterclockwise):
        OrientedClosedCurve(square_vertices()[::-1])
    with pytest.raises(NotSimple):
        OrientedClosedCurve([0j, 3 + 0j, 3 + 3j, 3j, 1.5 - 1j])
    with pytest.raises(NotSimple):
        OrientedClosedCurve([0j, 1 + 0j])


def test_curve_parameterization():
    S = OrientedClosedCurve(square_vertices())
    assert S.length == pytest.approx(8.0)
    assert S.points(0.0) == -1 - 1j
    assert S.points(0.125) == pytest.approx(0 - 1j)
    assert S.points(1.125) == pytest.approx(0 - 1j)
    assert S.param_of(1 + 0.1j) == pytest.approx(0.25 + 1.1 / 8)
    np.testing.assert_allclose(S.vertex_params, [0, 0.25, 0.5, 0.75])


def test_arcs_wrap_counterclockwise():
    S = OrientedClosedCurve(square_vertices())
    A = S.arc(0.875, 0.125)
    assert A.span == pytest.approx(0.25)
    assert A.start == pytest.approx(-1 + 0j)
    assert A.end == pytest.approx(0 - 1j)
    np.testing.assert_allclose(A.polyline(), [-1 + 0j, -1 - 1j, 0 - 1j], atol=1e-12)
    assert A.complement().span == pytest.approx(0.75)
    assert A.contains_param(0.95) and not A.contains_param(0.5)


def test_contains():
    S = OrientedClosedCurve(square_vertices())
    assert contains(S, 0.3 + 0.2j)
    assert not contains(S, 3 + 0j)
    with pytest.raises(OnCurve):
        contains(S, 1 + 0.5j)


def test_topological_hull_fills_holes():
    ring = Polygon(square_vertices_xy(1.5), [square_vertices_xy(0.5)])
    region = region_of(ring, WINDOW, 32)
    hull = topological_hull(ring, WINDOW, 32)
    assert not region.marks(0j)[0]
    assert hull.marks(0j)[0]
    assert hull.area == pytest.approx(9.0, rel=0.05)
    assert vector_hull(ring).area == pytest.approx(9.0)


def test_topological_hull_default_resolution():
    hull = topological_hull(Polygon(square_vertices_xy(1.0)), WINDOW)
    assert hull.resolution == 512
    assert hull.area == pytest.approx(4.0, rel=0.01)


def test_topological_hull_of_a_segment_is_itself():
    hull = topological_hull(named_continuum("segment"), WINDOW, 32)
    assert hull.marks(0.5 + 0j)[0]
    assert not hull.marks(0.5 + 0.5j)[0]


def test_topological_hull_rejects_bad_input():
    with pytest.raises(BadResolution):
        topological_hull(named_continuum("segment"), WINDOW, 0)
    with pytest.raises(OutsideWindow):
        topological_hull(LineString([(-3, 0), (0, 0)]), WINDOW, 32)


def test_crosscuts_of_a_curve_weaving_through_a_segment():
    X = region_of(named_continuum("segment"), WINDOW, 64)
    S = OrientedClosedCurve([(-0.8, -1), (0.8, -1), (0.8, 1), (0.3, 1), (0.3, -0.5), (-0.3, -0.5),
                             (-0.3, 1), (-0.8, 1)])
    cuts = crosscut_components(S, X)
    assert len(cuts) == 4
    for cut in cuts:
        assert abs(cut.a.imag) < 2 * X.cell and abs(cut.b.imag) < 2 * X.cell
    areas = sorted(cut.shadow_area for cut in cuts)
    assert areas == pytest.approx([0.3, 0.5, 0.5, 1.6], rel=0.15)


def test_shadow_of_a_bump_outside_the_square():
    hull = vector_hull(named_continuum("unit-square"))
    theta = np.linspace(-np.pi / 2, np.pi / 2, 129)
    path = 1 + 0.5 * np.exp(1j * theta)
    shadow = shadow_of(hull, path)
    assert shadow.area == pytest.approx(np.pi / 8, rel=1e-3)
    assert shadow.contains(Point(1.2, 0))


def test_polyline_path():
    P = PolylinePath([0j, 1 + 0j, 1 + 1j])
    assert P.length == pytest.approx(2.0)
    assert P.at(0.75) == pytest.approx(1 + 0.5j)
    assert P.reversed().start == 1 + 1j


def test_bumping_curve_hugs_the_square():
    X = named_continuum("unit-square")
    bumped = bumping_curve(X, lambda z: z + 3, mesh=0.2)
    assert bumped.curve.polygon.buffer(1e-6).covers(X)
    assert bumped.partition.size >= 2
    assert np.all(np.diff(bumped.partition) > 0)
    for p in bumped.contacts:
        assert X.distance(Point(p.real, p.imag)) < 1e-9


def test_bumping_curve_refuses_a_fixed_point_near_the_compactum():
    with pytest.raises(FixedPointNearX):
        bumping_curve(named_continuum("unit-square"), lambda z: z, mesh=0.2)


def test_named_continua():
    assert named_continuum("unit-square").area == pytest.approx(4.0)
    assert named_continuum("horseshoe").area == pytest.approx(np.pi * 3 * 300 / 360, rel=1e-3)
    assert named_continuum("two-points").geom_type == "MultiPoint"
    with pytest.raises(ValueError):
        named_continuum("moebius")


def test_topological_hull_is_idempotent(rng):
    for _ in range(5):
        outer = star_polygon(rng).polygon
        inner = star_polygon(rng, rmin=0.2, rmax=0.35).polygon
        ring = Polygon(outer.exterior.coords, [inner.exterior.coords])
        hull = topological_hull(ring, WINDOW, 32)
        again = topological_hull(hull, WINDOW, 32)
        assert np.array_equal(again.mask, hull.mask)
        assert np.array_equal(hull_region(hull).mask, hull.mask)
        assert np.all(hull.mask[region_of(ring, WINDOW, 32).mask])
        assert hull.marks(0j)[0]


def test_topological_hull_fills_both_lobes_of_a_figure_eight():
    theta = np.linspace(0, 2 * np.pi, 4000, endpoint=False)
    lobes = [c + 0.9 * np.exp(1j * theta) for c in (-0.9, 0.9)]
    cloud = MultiPoint(np.column_stack([np.concatenate(lobes).real, np.concatenate(lobes).imag]))
    hull = topological_hull(cloud, WINDOW, 256)
    assert hull.marks(np.array([-0.9 + 0j, 0.9 + 0j])).all()
    assert not hull.marks(1.5j)[0]
    filled = unary_union([Polygon(np.column_stack([z.real, z.imag])) for z in lobes])
    assert hull.area == pytest.approx(filled.area, rel=0.02)


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True))
def test_an_arc_and_its_complement_cover_the_curve_once(a, b, t):
    def gap(u, v):
        return abs((u - v + 0.5) % 1.0 - 0.5)

    assume(gap(a, b) > 1e-6 and gap(t, a) > 1e-9 and gap(t, b) > 1e-9)
    S = OrientedClosedCurve(square_vertices())
    A, B = S.arc(a, b), S.arc(b, a)
    assert A.span + B.span == pytest.approx(1.0)
    assert A.contains_param(t) != B.contains_param(t)
    assert A.end == pytest.approx(B.start)
    assert B.end == pytest.approx(A.start)


def square_vertices_xy(half: float):
    return [(-half, -half), (half, -half), (half, half), (-half, half)]
