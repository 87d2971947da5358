"""SVG 1.1 figures for scene tasks, drawn in window coordinates."""

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import shapely
import structlog
from shapely.geometry.base import BaseGeometry

from curve import OrientedClosedCurve
from geom import Ball, CircularArc, Window
from kp import KPPartition, hull_of

logger = structlog.get_logger()

SIGN_COLORS = {"+": "#1f77b4", "-": "#d62728", "0": "#7f7f7f", "excluded": "#bbbbbb"}

HEADER = """<?xml version="1.0" standalone="no"?>
<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" "http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">
<svg version="1.1" width="{px}" height="{px_h}" viewBox="{x} {y} {w} {h}" xmlns="http://www.w3.org/2000/svg">
<g transform="scale(1,-1)">
<rect x="{x}" y="{ry}" width="{w}" height="{h}" fill="#ffffff"/>
"""


class SVGFigure:
    """Accumulates elements and writes them under a fixed viewBox."""

    def __init__(self, window: Window, pixels: int = 800):
        self.window = window
        self.pixels = pixels
        self.items: List[str] = []
        self.stroke = window.diameter / 600

    def _points(self, z: Iterable[complex]) -> str:
        return " ".join(f"{p.real:.6f},{p.imag:.6f}" for p in np.asarray(list(z), dtype=complex))

    def polyline(self, z: Sequence[complex], color: str = "#000000", width: float = 1.0,
                 title: Optional[str] = None) -> None:
        body = f'<polyline points="{self._points(z)}" fill="none" stroke="{color}" ' \
               f'stroke-width="{self.stroke * width:.6f}"'
        self.items.append(f"{body}><title>{title}</title></polyline>" if title else body + "/>")

    def polygon(self, z: Sequence[complex], fill: str = "none", color: str = "#000000",
                opacity: float = 1.0) -> None:
        self.items.append(f'<polygon points="{self._points(z)}" fill="{fill}" fill-opacity="{opacity}" '
                          f'stroke="{color}" stroke-width="{self.stroke:.6f}"/>')

    def point(self, z: complex, color: str = "#000000", size: float = 3.0) -> None:
        self.items.append(f'<circle cx="{z.real:.6f}" cy="{z.imag:.6f}" r="{self.stroke * size:.6f}" '
                          f'fill="{color}"/>')

    def geometry(self, geom: BaseGeometry, fill: str = "#dddddd", color: str = "#000000") -> None:
        for part in shapely.get_parts(geom):
            coords = shapely.get_coordinates(part.exterior if part.geom_type == "Polygon" else part)
            z = coords[:, 0] + 1j * coords[:, 1]
            if part.geom_type == "Polygon":
                self.polygon(z, fill=fill, color=color)
            elif part.geom_type == "Point":
                self.point(complex(z[0]), color)
            else:
                self.polyline(z, color, 1.5)

    def arc(self, arc: CircularArc, color: str = "#000000", title: Optional[str] = None) -> None:
        for piece in arc.polylines(96, 2 * self.window.diameter):
            self.polyline(piece, color, 1.0, title)

    def ball(self, ball: Ball, color: str = "#999999") -> None:
        if ball.is_circle:
            self.items.append(f'<circle cx="{ball.center.real:.6f}" cy="{ball.center.imag:.6f}" '
                              f'r="{ball.radius:.6f}" fill="none" stroke="{color}" '
                              f'stroke-width="{self.stroke * 0.5:.6f}" stroke-dasharray="{self.stroke * 4:.6f}"/>')
        else:
            t = ball.boundary_tangent() * 2 * self.window.diameter
            self.polyline([ball.anchor - t, ball.anchor + t], color, 0.5)

    def svg(self) -> str:
        w = self.window
        px_h = int(round(self.pixels * w.height / w.width))
        head = HEADER.format(px=self.pixels, px_h=px_h, x=w.xmin, y=-w.ymax, w=w.width, h=w.height,
                             ry=w.ymin)
        return head + "\n".join(self.items) + "\n</g></svg>\n"

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.svg())
        logger.debug("Figure written", path=str(path), elements=len(self.items))
        return path


def partition_figure(partition: KPPartition, window: Window, signs: Optional[Dict[int, str]] = None,
                     show_balls: bool = False) -> SVGFigure:
    """Compactum, hull polygons of gap elements, and chords colored by sign."""
    fig = SVGFigure(window)
    for element in partition.interior_elements():
        _, poly = hull_of(element, window)
        for part in shapely.get_parts(poly):
            if part.geom_type == "Polygon":
                coords = shapely.get_coordinates(part.exterior)
                fig.polygon(coords[:, 0] + 1j * coords[:, 1], fill="#ffe9a8", color="none", opacity=0.6)
    if partition.geometry is not None:
        fig.geometry(partition.geometry)
    for chord in partition.chords():
        sign = (signs or {}).get(chord.id)
        color = SIGN_COLORS.get(sign, "#555555") if sign else "#555555"
        fig.arc(chord.arc, color, title=f"chord {chord.id}")
    if show_balls:
        for element in partition.elements:
            fig.ball(element.ball)
    return fig


def curve_figure(S: OrientedClosedCurve, window: Window, partition: Sequence[float] = (),
                 junctions: Sequence = (), images: Sequence[np.ndarray] = (),
                 compactum: Optional[BaseGeometry] = None) -> SVGFigure:
    """Curve with partition points, junction rays and image paths."""
    fig = SVGFigure(window)
    if compactum is not None:
        fig.geometry(compactum)
    fig.polyline(np.append(S.vertices, S.vertices[0]), "#000000", 1.5)
    for p in S.points(np.asarray(partition, dtype=float)) if len(partition) else []:
        fig.point(complex(p), "#2ca02c", 4.0)
    for J in junctions:
        for label, ray in J.rays.items():
            fig.polyline(ray, {"+": "#1f77b4", "i": "#9467bd", "-": "#d62728"}[label], 0.8)
    for image in images:
        fig.polyline(image, "#ff7f0e", 0.8)
    return fig


def points_figure(window: Window, points: Sequence[complex], compactum: Optional[BaseGeometry] = None,
                  box: Optional[Window] = None) -> SVGFigure:
    fig = SVGFigure(window)
    if compactum is not None:
        fig.geometry(compactum)
    if box is not None:
        fig.polyline(np.append(box.corners(), box.corners()[0]), "#7f7f7f", 0.8)
    for p in points:
        fig.point(complex(p), "#d62728", 4.0)
    return fig
