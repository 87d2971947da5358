"""Identity checks and the fixed point locator on concrete instances."""

import numpy as np
import pytest

from checkers import (check_crosscut_invariance, check_homotopy, check_hull_index, check_index_variation,
                      check_junction_invariance, check_lollipop, check_oriented_fixed_point,
                      check_period_two, locate_fixed_point, locate_fixed_points)
from conftest import horseshoe, random_polynomial, ring_params, square_vertices, star_polygon
from curve import OrientedClosedCurve, named_continuum
from errors import HypothesisViolation, NoValidPartition
from maps import PlaneMap, parse_map
from variation import auto_partition, variation_crosscut

HORSESHOE_DEGREES = (15, 45, 75, 105, 120, 135, 165, 195, 205, 275, 295)


def squeezed_turn(turn: complex, name: str) -> PlaneMap:
    """Rotation of the horseshoe that also pulls radii 1..2 into 1.25..1.75."""
    return PlaneMap.from_callable(lambda z: turn * z * (1.5 + 0.5 * (np.abs(z) - 1.5)) / np.abs(z), name=name)


def radial_stick(degrees: float) -> np.ndarray:
    u = np.exp(1j * np.deg2rad(degrees))
    return np.array([2 * u, 1.5 * u, u])


def test_index_equals_variation_plus_one_on_the_horseshoe():
    S = horseshoe()
    report = check_index_variation(parse_map("i*z"), S, ring_params(S, HORSESHOE_DEGREES))
    assert report.index == 0
    assert report.variation == -1
    assert report.equal


def test_index_equals_variation_plus_one_for_a_constant(unit_circle):
    report = check_index_variation(parse_map("0.1 + 0.2i"), unit_circle)
    assert report.index == 1
    assert report.variation == 0
    assert report.equal


def test_index_equals_variation_plus_one_on_random_instances(rng):
    checked = attempts = 0
    while checked < 100 and attempts < 400:
        attempts += 1
        S = star_polygon(rng)
        f = random_polynomial(rng, degree=int(rng.integers(1, 5)))
        try:
            report = check_index_variation(f, S, seed=3)
        except NoValidPartition:
            continue
        assert report.equal, (f.text, report.index, report.variation)
        checked += 1
    assert checked == 100, f"only {checked} of {attempts} instances admitted a partition"


def test_hull_index(unit_circle):
    report = check_hull_index(parse_map("-z/2"), unit_circle)
    assert report.index == 1 and report.passed
    with pytest.raises(HypothesisViolation) as info:
        check_hull_index(parse_map("2*z"), unit_circle)
    assert info.value.clause == "image-in-hull"


def test_homotopy_without_boundary_fixed_points(unit_circle):
    report = check_homotopy(parse_map("-z/2"), parse_map("0.3"), unit_circle, levels=8)
    assert report.constant
    assert report.indices == [1] * 9


def test_homotopy_that_pushes_the_fixed_point_out(unit_circle):
    report = check_homotopy(parse_map("0.5*z"), parse_map("z + 3"), unit_circle, levels=10)
    assert report.indices[0] == 1
    assert report.indices[-1] == 0
    assert not report.constant


def test_variation_does_not_depend_on_the_junction():
    S = horseshoe()
    report = check_junction_invariance(parse_map("i*z"), S, ring_params(S, HORSESHOE_DEGREES), count=3, seed=11)
    assert report.agree
    assert report.values == [-1, -1, -1]


def test_crosscut_variation_does_not_depend_on_the_completing_curve():
    X = named_continuum("unit-square")
    bump = 1 + 0.5 * np.exp(1j * np.linspace(-np.pi / 2, np.pi / 2, 65))
    square = OrientedClosedCurve(square_vertices())
    pentagon = OrientedClosedCurve([-1 - 1j, 1 - 1j, 1 + 1j, -1 + 1j, -1.5 + 0j])
    report = check_crosscut_invariance(parse_map("i*z"), bump, X, [square, pentagon], seed=5)
    assert len(report.values) == 3
    assert report.agree


def test_lollipop_counts_arcs_on_the_right():
    S = horseshoe()
    f = squeezed_turn(1j, "quarter-turn")
    report = check_lollipop(f, S, ring_params(S, HORSESHOE_DEGREES), radial_stick(120))
    assert report.side == "R"
    assert report.index == 0
    assert report.identity_holds
    assert report.variation_sum == -1
    assert report.negative_arcs
    assert report.corollary_holds


def test_lollipop_counts_arcs_on_the_left():
    S = horseshoe()
    f = squeezed_turn(-1j, "reverse-quarter-turn")
    degrees = (5, 25, 95, 120, 150, 180, 210, 240, 270, 285)
    report = check_lollipop(f, S, ring_params(S, degrees), radial_stick(180))
    assert report.side == "L"
    assert report.identity_holds
    assert report.corollary_holds


def test_lollipop_rejects_a_stick_off_the_partition():
    S = horseshoe()
    f = squeezed_turn(1j, "quarter-turn")
    with pytest.raises(HypothesisViolation) as info:
        check_lollipop(f, S, ring_params(S, HORSESHOE_DEGREES), radial_stick(100))
    assert info.value.clause == "stick-endpoints"


def test_locate_fixed_points_of_the_square_map():
    report = locate_fixed_points(parse_map("z^2"), [-2.0, -2.0, 2.0, 2.0])
    assert report.status == "found"
    assert report.boundary_index == 2
    np.testing.assert_allclose(report.points, [[0.0, 0.0], [1.0, 0.0]], atol=1e-8)
    assert all(r < 1e-8 for r in report.residuals)


def test_locate_a_reversing_fixed_point():
    report = locate_fixed_points(parse_map("conj(z)/2"), [-1.0, -1.0, 1.0, 1.0])
    assert report.boundary_index == -1
    np.testing.assert_allclose(report.points, [[0.0, 0.0]], atol=1e-8)
    assert locate_fixed_point(parse_map("conj(z)/2"), [-1.0, -1.0, 1.0, 1.0]) == pytest.approx(0j, abs=1e-8)


def test_zero_index_box_reports_absent():
    report = locate_fixed_points(parse_map("z + 1"), [-1.0, -1.0, 1.0, 1.0])
    assert report.status == "absent"
    assert report.boundary_index == 0
    assert report.points == []
    assert locate_fixed_point(parse_map("z + 1"), [-1.0, -1.0, 1.0, 1.0]) is None


def test_period_two_point():
    report = check_period_two(parse_map("conj(z)/2 + 1"), [0.0, -2.0, 4.0, 2.0])
    assert report.iterate == 2
    np.testing.assert_allclose(report.points, [[2.0, 0.0]], atol=1e-8)


def test_oriented_fixed_point_for_a_contraction():
    report = check_oriented_fixed_point(parse_map("0.5*z + 0.2"), named_continuum("unit-square"))
    assert report.status == "found"
    assert report.iterate == 1
    np.testing.assert_allclose(report.points, [[0.4, 0.0]], atol=1e-8)


def test_oriented_fixed_point_falls_back_to_period_two():
    report = check_oriented_fixed_point(parse_map("-conj(z)/2"), named_continuum("unit-square"))
    assert report.iterate == 2
    np.testing.assert_allclose(report.points, [[0.0, 0.0]], atol=1e-8)


def test_oriented_fixed_point_hypotheses():
    square = named_continuum("unit-square")
    with pytest.raises(HypothesisViolation) as info:
        check_oriented_fixed_point(parse_map("2*z"), square)
    assert info.value.clause == "image-in-hull"
    with pytest.raises(HypothesisViolation) as info:
        check_oriented_fixed_point(parse_map("fold"), square)
    assert info.value.clause == "orientation"


def random_turn(rng: np.random.Generator) -> PlaneMap:
    """Near quarter turn that shrinks a little, so a bump on the right edge of
    the square lands above it with its endpoints inside."""
    turn = 1j * rng.uniform(0.8, 0.95)
    shift = complex(*rng.uniform(-0.03, 0.03, 2))
    return PlaneMap.from_callable(lambda z: turn * z + shift, name="random-turn")


def right_bump(center: complex, radius: float, n: int = 65) -> np.ndarray:
    return center + radius * np.exp(1j * np.linspace(-np.pi / 2, np.pi / 2, n))


def coefficients(*values: complex) -> str:
    return "poly[" + ", ".join(f"({c.real:.6f}{c.imag:+.6f}i)" for c in values) + "]"


def polar(rng: np.random.Generator, largest: float, smallest: float = 0.0) -> complex:
    return rng.uniform(smallest, largest) * np.exp(2j * np.pi * rng.uniform())


@pytest.mark.parametrize("seed", range(20))
def test_variation_does_not_depend_on_the_junction_on_random_instances(seed):
    rng = np.random.default_rng(1000 + seed)
    for _ in range(20):
        S = star_polygon(rng)
        f = random_polynomial(rng, degree=int(rng.integers(1, 5)))
        try:
            partition = auto_partition(f, S)
        except NoValidPartition:
            continue
        break
    else:
        pytest.fail("no instance admitted a partition")
    report = check_junction_invariance(f, S, partition, count=5, seed=seed)
    assert len(report.values) == 5
    assert report.agree, report.values


@pytest.mark.parametrize("seed", range(20))
def test_crosscut_variation_does_not_depend_on_the_completing_curve_on_random_instances(seed):
    rng = np.random.default_rng(2000 + seed)
    bump = right_bump(1 + 1j * rng.uniform(-0.4, 0.4), rng.uniform(0.2, 0.5))
    f = random_turn(rng)
    square = OrientedClosedCurve(square_vertices())
    tip = -1 - rng.uniform(0.3, 0.8) + 1j * rng.uniform(-0.5, 0.5)
    pentagon = OrientedClosedCurve([-1 - 1j, 1 - 1j, 1 + 1j, -1 + 1j, tip])
    report = check_crosscut_invariance(f, bump, named_continuum("unit-square"), [square, pentagon], seed=seed)
    assert len(report.values) == 3
    assert report.agree, report.values


@pytest.mark.parametrize("seed", range(10))
def test_crosscut_variation_adds_over_a_chain_of_smaller_crosscuts(seed):
    rng = np.random.default_rng(3000 + seed)
    X = named_continuum("unit-square")
    middle, radius = rng.uniform(-0.4, 0.4), rng.uniform(0.2, 0.5)
    f = random_turn(rng)
    pieces = int(rng.integers(2, 4))
    whole = variation_crosscut(f, right_bump(1 + 1j * middle, radius), X, np.random.default_rng(seed))
    small = radius / pieces
    centers = 1 + 1j * (middle - radius + small * (2 * np.arange(pieces) + 1))
    parts = [variation_crosscut(f, right_bump(c, small), X, np.random.default_rng(seed)) for c in centers]
    assert sum(parts) == whole


@pytest.mark.parametrize("seed", range(10))
def test_locator_finds_the_fixed_point_of_a_disk_contraction(seed):
    rng = np.random.default_rng(4000 + seed)
    # |f| <= 0.9 on the unit disk and |f'| < 0.8 on the box
    f = parse_map(coefficients(polar(rng, 0.3), polar(rng, 0.5, 0.2), polar(rng, 0.1)))
    report = locate_fixed_points(f, [-1.0, -1.0, 1.0, 1.0])
    assert report.status == "found"
    assert report.boundary_index == 1
    (point,) = report.points
    z = complex(*point)
    assert abs(complex(np.asarray(f(np.array([z])))[0]) - z) < 1e-8
    w = 0j
    for _ in range(200):
        w = complex(np.asarray(f(np.array([w])))[0])
    assert z == pytest.approx(w, abs=1e-8)


def test_period_two_of_a_reflection_holds_everywhere():
    f = parse_map("-conj(z)")
    report = check_period_two(f, [-1.0, -1.0, 1.0, 1.0])
    assert report.iterate == 2
    assert report.status == "found"
    assert report.boundary_index is None
    (point,) = report.points
    z = complex(*point)
    back = np.asarray(f(f(np.array([z]))))[0]
    assert abs(back - z) < 1e-12
    assert report.residuals[0] < 1e-12


def test_period_two_of_a_reversing_contraction():
    report = check_period_two(parse_map("0.5*conj(z) + 0.1"), [-1.0, -1.0, 1.0, 1.0])
    assert report.iterate == 2
    assert report.boundary_index == 1
    np.testing.assert_allclose(report.points, [[0.2, 0.0]], atol=1e-8)


@pytest.mark.parametrize("seed", range(10))
def test_hull_index_of_random_smooth_maps_into_the_hull(seed):
    rng = np.random.default_rng(5000 + seed)
    S = star_polygon(rng)
    c, b, a, r = polar(rng, 0.1), polar(rng, 0.25), polar(rng, 0.05), polar(rng, 0.05)
    # |f| < 0.6 on S, inside the disk every star polygon of radii 0.7..1.3 holds
    f = PlaneMap.from_callable(lambda z: c + b * z + a * z ** 2 + r * np.conj(z), name="smooth")
    report = check_hull_index(f, S)
    assert report.index == 1
    assert report.passed
