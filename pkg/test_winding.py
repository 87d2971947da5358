"""Index and fractional index."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from curve import OrientedClosedCurve
from errors import FixedPointOnCurve, OnPath
from maps import parse_map
from winding import fractional_index, index, lift_field, winding_number

# (map, radius, index)
INDEX_CASES = [
    ("z + 1", 1.0, 0),
    ("0.1 + 0.2i", 1.0, 1),
    ("z^2", 2.0, 2),
    ("2*z", 1.0, 1),
    ("conj(z) + 3", 1.0, 0),
    ("-z", 1.0, 1),
]


@pytest.mark.parametrize("text,radius,expected", INDEX_CASES)
def test_index_oracle(text, radius, expected):
    S = OrientedClosedCurve.circle(0j, radius, 128)
    assert index(parse_map(text), S) == expected


def test_index_of_a_polygon_around_a_repelling_point():
    S = OrientedClosedCurve([(-1, -1), (2, -1), (2, 1), (-1, 1)])
    assert index(parse_map("3*z"), S) == 1
    assert index(parse_map("3*z - 10"), S) == 0


def test_fixed_point_on_the_curve_is_reported():
    S = OrientedClosedCurve.circle(0j, 1.0, 128)
    with pytest.raises(FixedPointOnCurve) as info:
        index(parse_map("conj(z)"), S)
    assert info.value.point is not None
    assert abs(abs(info.value.point) - 1.0) < 1e-6


@given(st.floats(min_value=0.01, max_value=0.99), st.floats(min_value=0.01, max_value=0.98))
def test_fractional_index_is_additive(start, span):
    S = OrientedClosedCurve.circle(0j, 1.5, 64)
    f = parse_map("z^2 - 0.5")
    A = S.arc(start, start + span)
    total = fractional_index(f, S, A) + fractional_index(f, S, A.complement())
    assert abs(total - index(f, S)) < 1e-9


def test_index_is_invariant_under_refinement(unit_circle):
    f = parse_map("0.5*z^3 + 0.2")
    assert index(f, unit_circle) == index(f, unit_circle.refined())


def test_certified_lift_uses_the_lipschitz_bound():
    f = parse_map("z^2", lipschitz=6.0)
    S = OrientedClosedCurve.circle(0j, 1.4, 64)
    assert index(f, S) == 2


def test_lift_of_a_rotating_field():
    lift = lift_field(lambda t: np.exp(2j * np.pi * 3 * t))
    assert lift.total == pytest.approx(3.0)
    assert lift.max_step < np.pi / 2


def test_winding_number():
    square = np.array([0j, 1 + 0j, 1 + 1j, 1j])
    assert winding_number(square, 0.5 + 0.5j) == 1
    assert winding_number(square[::-1], 0.5 + 0.5j) == -1
    assert winding_number(square, 2 + 0j) == 0
    with pytest.raises(OnPath):
        winding_number(square, 0.5 + 0j)
