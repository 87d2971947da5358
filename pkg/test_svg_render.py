"""SVG figures."""

import numpy as np

from curve import OrientedClosedCurve, named_continuum
from geom import Window
from kp import maximal_balls
from svg_render import SVGFigure, curve_figure, partition_figure, points_figure
from variation import make_junction

WINDOW = Window(-2.0, -2.0, 2.0, 2.0)


def test_partition_figure_draws_hulls_and_signed_chords(tmp_path):
    P = maximal_balls(named_continuum("unit-square"), WINDOW, h=0.02)
    text = partition_figure(P, WINDOW, signs={0: "-"}, show_balls=True).svg()
    assert text.startswith("<?xml")
    assert 'viewBox="-2.0 -2.0 4.0 4.0"' in text
    assert text.count("<title>chord") >= 8
    assert "#d62728" in text
    assert text.rstrip().endswith("</svg>")


def test_curve_figure_with_junction(tmp_path):
    S = OrientedClosedCurve.circle(0j, 1.0, 64)
    J = make_junction(S, 1 + 0j)
    fig = curve_figure(S, WINDOW, [0.0, 0.5], junctions=[J], images=[np.array([0j, 0.5j])])
    path = fig.save(tmp_path / "figures" / "curve.svg")
    text = path.read_text()
    assert text.count('fill="#2ca02c"') == 2
    assert "#9467bd" in text


def test_points_figure():
    fig = points_figure(WINDOW, [0.4 + 0j], named_continuum("two-points"), Window(-1.0, -1.0, 1.0, 1.0))
    assert isinstance(fig, SVGFigure)
    assert fig.svg().count("<circle") == 3
