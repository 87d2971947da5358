"""Map parsing, degree of f_p and orientation evidence."""

import numpy as np
import pytest

from curve import OrientedClosedCurve
from errors import InvalidLipschitzBound, MapSyntaxError, NotInHull, OutsideWindow
from geom import Window
from maps import PlaneMap, degree_at, homotopy, orientation_class, parse_map

Z = np.array([0.3 + 0.4j, -1.2 + 0.1j, 2j])


@pytest.mark.parametrize("text,expected", [
    ("z^2 + 1", Z ** 2 + 1),
    ("poly[1, 0, 2]", 1 + 2 * Z ** 2),
    ("affine[2i, 1]", 2j * Z + 1),
    ("translate[0.5]", Z + 0.5),
    ("conj", np.conj(Z)),
    ("conj(z^2)", np.conj(Z ** 2)),
    ("compose(poly[0, 1, 1], conj)", np.conj(Z) + np.conj(Z) ** 2),
    ("fold", np.abs(Z.real) + 1j * Z.imag),
    ("-z + 0.6i", -Z + 0.6j),
    ("exp(z) / 2", np.exp(Z) / 2),
    ("const[1.5e-1]", np.full(3, 0.15 + 0j)),
])
def test_parse_and_evaluate(text, expected):
    np.testing.assert_allclose(parse_map(text)(Z), expected, rtol=1e-12)


@pytest.mark.parametrize("text,column", [
    ("z^", 3),
    ("z + * 2", 5),
    ("sin(z)", 1),
    ("poly[z, 1]", 6),
    ("z^1.5", 3),
    ("(z + 1", 7),
    ("", 1),
])
def test_syntax_errors_carry_a_column(text, column):
    with pytest.raises(MapSyntaxError) as info:
        parse_map(text)
    assert info.value.column == column


def test_scalar_and_array_evaluation():
    f = parse_map("z^3")
    assert f(1j) == pytest.approx(-1j)
    assert f(np.array([[1, 2]])).shape == (1, 2)


def test_window_and_lipschitz_checks():
    f = parse_map("z^2", window=Window(-1.0, -1.0, 1.0, 1.0))
    with pytest.raises(OutsideWindow):
        f.evaluate(3 + 0j)
    assert f.evaluate(0.5) == pytest.approx(0.25)
    with pytest.raises(InvalidLipschitzBound):
        parse_map("3*z", lipschitz=2.0)
    assert parse_map("3*z", lipschitz=3.0).lipschitz == 3.0


def test_compose_and_iterate():
    f = parse_map("z^2 + 1")
    g = f.iterate(2)
    assert g(1j) == pytest.approx(f(f(1j)))
    h = parse_map("conj").compose(f)
    assert h(1 + 1j) == pytest.approx(np.conj((1 + 1j) ** 2 + 1))


def test_homotopy_endpoints():
    f0, f1 = parse_map("z^2"), parse_map("-z")
    np.testing.assert_allclose(homotopy(f0, f1, 0.0)(Z), f0(Z))
    np.testing.assert_allclose(homotopy(f0, f1, 1.0)(Z), f1(Z))
    np.testing.assert_allclose(homotopy(f0, f1, 0.25)(Z), 0.75 * f0(Z) + 0.25 * f1(Z))


def test_degree_at():
    S = OrientedClosedCurve.circle(0j, 1.0, 96)
    assert degree_at(parse_map("z^3"), S, 0.1) == 3
    assert degree_at(parse_map("conj(z^2)"), S, 0.1j) == -2
    with pytest.raises(NotInHull):
        degree_at(parse_map("z"), S, 3 + 0j)


def test_orientation_positive_for_an_odd_polynomial():
    profile = orientation_class(parse_map("z^3 + 0.2*z"), trials=50, seed=7)
    assert profile.classification == "positive"
    assert profile.positive == 50
    assert len(profile.trials) == 50


def test_orientation_negative_for_conjugate_square():
    profile = orientation_class(parse_map("conj(z^2)"), trials=50, seed=7)
    assert profile.classification == "negative"
    assert profile.negative == 50


def test_orientation_mixed_for_the_fold():
    profile = orientation_class(parse_map("fold"), trials=50, seed=7)
    assert profile.classification == "mixed"
    assert profile.positive > 0 and profile.negative > 0


def test_from_callable():
    f = PlaneMap.from_callable(lambda z: 2 * z, name="double")
    assert f(1 + 1j) == 2 + 2j
    assert "double" in repr(f)
