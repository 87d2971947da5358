"""Planar primitives: orientation tests, balls, smallest enclosing disks,
inversion and arcs that cross a ball boundary at right angles.

Points are Python complex numbers throughout; arrays of points are numpy
complex arrays.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np
import structlog

from config.settings import settings
from errors import DegenerateChord, EmptyInput, NotOnBoundary, PoleInput

logger = structlog.get_logger()

Point = complex


def as_point(p: Any) -> complex:
    """Coerce a complex, (x, y) pair or shapely point to a complex number."""
    if isinstance(p, complex):
        return p
    if hasattr(p, "x") and hasattr(p, "y"):
        return complex(p.x, p.y)
    if isinstance(p, (int, float, np.floating, np.integer)):
        return complex(p)
    if isinstance(p, np.complexfloating):
        return complex(p)
    x, y = p
    return complex(float(x), float(y))


def as_points(points: Iterable[Any]) -> np.ndarray:
    """Coerce a sequence of points (or an (n, 2) array) to a complex array."""
    arr = np.asarray(points)
    if np.iscomplexobj(arr):
        return arr.astype(complex).ravel()
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0].astype(float) + 1j * arr[:, 1].astype(float)
    return np.array([as_point(p) for p in points], dtype=complex)


def to_xy(z: np.ndarray) -> np.ndarray:
    """(n, 2) float coordinates of a complex array."""
    z = np.asarray(z, dtype=complex).ravel()
    return np.column_stack([z.real, z.imag])


def cross(u: Any, v: Any) -> Any:
    """Twice the signed area spanned by u and v (vectorized)."""
    return np.imag(np.conj(u) * v)


def orient(p: complex, q: complex, r: complex, eps: Optional[float] = None) -> int:
    """Sign of the turn p -> q -> r, with a zero band around collinearity."""
    eps = settings.orientation_epsilon if eps is None else eps
    area = float(cross(q - p, r - p))
    if abs(area) <= eps:
        return 0
    return 1 if area > 0 else -1


def wrap_angle(theta: Any) -> Any:
    """Principal value in (-pi, pi]."""
    wrapped = np.mod(np.asarray(theta) + np.pi, 2 * np.pi) - np.pi
    wrapped = np.where(wrapped == -np.pi, np.pi, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class Window:
    """Axis-aligned working rectangle."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError(f"empty window {self}")

    @classmethod
    def around(cls, points: Iterable[Any], margin: float = 0.5) -> "Window":
        z = as_points(list(points))
        if z.size == 0:
            raise EmptyInput("cannot build a window around no points")
        pad = margin * max(float(np.ptp(z.real)), float(np.ptp(z.imag)), 1e-3)
        return cls(float(z.real.min() - pad), float(z.imag.min() - pad),
                   float(z.real.max() + pad), float(z.imag.max() + pad))

    @classmethod
    def square(cls, center: complex, half_width: float) -> "Window":
        return cls(center.real - half_width, center.imag - half_width,
                   center.real + half_width, center.imag + half_width)

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def center(self) -> complex:
        return complex((self.xmin + self.xmax) / 2, (self.ymin + self.ymax) / 2)

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, z: Any, margin: float = 0.0) -> Any:
        z = np.asarray(z)
        inside = ((z.real >= self.xmin + margin) & (z.real <= self.xmax - margin)
                  & (z.imag >= self.ymin + margin) & (z.imag <= self.ymax - margin))
        if inside.ndim == 0:
            return bool(inside)
        return inside

    def strictly_contains(self, z: Any) -> bool:
        z = np.asarray(z)
        return bool(np.all((z.real > self.xmin) & (z.real < self.xmax)
                           & (z.imag > self.ymin) & (z.imag < self.ymax)))

    def corners(self) -> np.ndarray:
        """Corners in counterclockwise order starting at the lower left."""
        return np.array([complex(self.xmin, self.ymin), complex(self.xmax, self.ymin),
                         complex(self.xmax, self.ymax), complex(self.xmin, self.ymax)])

    def expanded(self, factor: float) -> "Window":
        c = self.center
        hw, hh = self.width * factor / 2, self.height * factor / 2
        return Window(c.real - hw, c.imag - hh, c.real + hw, c.imag + hh)

    def to_json(self) -> List[float]:
        return [self.xmin, self.ymin, self.xmax, self.ymax]


BALL_KINDS = ("disk", "half-plane", "exterior-disk")


@dataclass(frozen=True)
class Ball:
    """Closed round ball of the extended plane.

    A disk and an exterior disk carry center and radius; the exterior disk is
    the closed complement of the open disk together with infinity. A
    half-plane carries a boundary anchor and the unit normal pointing into
    the ball.
    """

    kind: str
    center: complex = 0j
    radius: float = 0.0
    anchor: complex = 0j
    normal: complex = 1j

    def __post_init__(self):
        if self.kind not in BALL_KINDS:
            raise ValueError(f"unknown ball kind {self.kind!r}")
        if self.kind == "half-plane":
            if abs(abs(self.normal) - 1.0) > settings.unit_normal_tolerance:
                raise ValueError("half-plane normal must have unit length")
        elif self.kind == "exterior-disk" and not self.radius > 0:
            raise ValueError("exterior disk needs a positive radius")
        elif self.kind == "disk" and self.radius < 0:
            raise ValueError("disk radius must be non-negative")

    @classmethod
    def half_plane(cls, anchor: complex, normal: complex) -> "Ball":
        return cls("half-plane", anchor=complex(anchor), normal=complex(normal) / abs(normal))

    @property
    def is_circle(self) -> bool:
        return self.kind != "half-plane"

    @property
    def diameter(self) -> float:
        return 2 * self.radius if self.kind == "disk" else math.inf

    @property
    def scale(self) -> float:
        return max(1.0, self.radius) if self.is_circle else 1.0

    def signed_depth(self, z: Any) -> Any:
        """Positive inside the ball, negative outside, zero on the boundary."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk":
            return self.radius - np.abs(z - self.center)
        if self.kind == "exterior-disk":
            return np.abs(z - self.center) - self.radius
        return np.real(np.conj(self.normal) * (z - self.anchor))

    def contains(self, z: Any, tol: float = 0.0) -> Any:
        return self.signed_depth(z) >= -tol

    def boundary_distance(self, z: Any) -> Any:
        return np.abs(self.signed_depth(z))

    def boundary_tangent(self) -> complex:
        """Direction of travel along a half-plane boundary, ball on the left."""
        return -1j * self.normal

    def boundary_position(self, z: Any) -> Any:
        """Coordinate along the boundary used to order contact points."""
        z = np.asarray(z, dtype=complex)
        if self.is_circle:
            return np.mod(np.angle(z - self.center), 2 * np.pi)
        return np.real(np.conj(self.boundary_tangent()) * (z - self.anchor))

    def project(self, z: complex) -> complex:
        """Nearest boundary point."""
        if self.is_circle:
            d = z - self.center
            if abs(d) == 0:
                return self.center + self.radius
            return self.center + d / abs(d) * self.radius
        return z - self.normal * float(np.real(np.conj(self.normal) * (z - self.anchor)))

    def inward_normal(self, z: complex) -> complex:
        """Unit normal at a boundary point, pointing into the ball."""
        if self.kind == "half-plane":
            return self.normal
        d = (z - self.center) / abs(z - self.center)
        return -d if self.kind == "disk" else d

    def to_json(self) -> Dict[str, Any]:
        if self.kind == "half-plane":
            return {"kind": self.kind, "anchor": [self.anchor.real, self.anchor.imag],
                    "normal": [self.normal.real, self.normal.imag]}
        return {"kind": self.kind, "center": [self.center.real, self.center.imag],
                "radius": self.radius}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "Ball":
        if data["kind"] == "half-plane":
            return cls.half_plane(as_point(data["anchor"]), as_point(data["normal"]))
        return cls(data["kind"], center=as_point(data["center"]), radius=float(data["radius"]))


# Smallest enclosing disk, randomized incremental (Welzl / Nayuki formulation)

def _in_circle(p: complex, c: Optional[Tuple[complex, float]]) -> bool:
    return c is not None and abs(p - c[0]) <= c[1] * (1 + 1e-14)


def _diameter_circle(a: complex, b: complex) -> Tuple[complex, float]:
    c = (a + b) / 2
    return c, max(abs(c - a), abs(c - b))


def circumcircle(a: complex, b: complex, c: complex) -> Optional[Tuple[complex, float]]:
    """Circle through three points, or None when they are collinear."""
    o = complex((min(a.real, b.real, c.real) + max(a.real, b.real, c.real)) / 2,
                (min(a.imag, b.imag, c.imag) + max(a.imag, b.imag, c.imag)) / 2)
    pa, pb, pc = a - o, b - o, c - o
    d = 2.0 * (pa.real * (pb.imag - pc.imag) + pb.real * (pc.imag - pa.imag)
               + pc.real * (pa.imag - pb.imag))
    if d == 0.0:
        return None
    na, nb, nc = abs(pa) ** 2, abs(pb) ** 2, abs(pc) ** 2
    x = (na * (pb.imag - pc.imag) + nb * (pc.imag - pa.imag) + nc * (pa.imag - pb.imag)) / d
    y = (na * (pc.real - pb.real) + nb * (pa.real - pc.real) + nc * (pb.real - pa.real)) / d
    center = o + complex(x, y)
    return center, max(abs(center - a), abs(center - b), abs(center - c))


def _circle_two(points: List[complex], p: complex, q: complex) -> Tuple[complex, float]:
    circ = _diameter_circle(p, q)
    left: Optional[Tuple[complex, float]] = None
    right: Optional[Tuple[complex, float]] = None
    for r in points:
        if _in_circle(r, circ):
            continue
        side = cross(q - p, r - p)
        c = circumcircle(p, q, r)
        if c is None:
            continue
        if side > 0 and (left is None or cross(q - p, c[0] - p) > cross(q - p, left[0] - p)):
            left = c
        elif side < 0 and (right is None or cross(q - p, c[0] - p) < cross(q - p, right[0] - p)):
            right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left[1] <= right[1] else right


def _circle_one(points: List[complex], p: complex) -> Tuple[complex, float]:
    c: Tuple[complex, float] = (p, 0.0)
    for i, q in enumerate(points):
        if not _in_circle(q, c):
            if c[1] == 0.0:
                c = _diameter_circle(p, q)
            else:
                c = _circle_two(points[: i + 1], p, q)
    return c


def min_enclosing_ball(points: Iterable[Any], seed: Optional[int] = None) -> Ball:
    """Smallest closed disk containing every point.

    A single point gives a disk of radius zero; that is the only place a
    zero-radius ball is produced.
    """
    z = as_points(list(points))
    if z.size == 0:
        raise EmptyInput("smallest enclosing ball of an empty set")
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    shuffled = [complex(p) for p in z[rng.permutation(z.size)]]
    c: Optional[Tuple[complex, float]] = None
    for i, p in enumerate(shuffled):
        if c is None or not _in_circle(p, c):
            c = _circle_one(shuffled[: i + 1], p)
    center, radius = c
    return Ball("disk", center=center, radius=float(radius))


def invert(p: Any, pole: complex) -> Any:
    """Inversion z -> pole + 1 / conj(z - pole) in the unit circle about the pole."""
    z = np.asarray(p, dtype=complex)
    d = z - pole
    if np.any(np.abs(d) <= settings.tolerance * 1e-3):
        raise PoleInput(f"cannot invert the pole {pole}")
    out = pole + 1.0 / np.conj(d)
    if out.ndim == 0:
        return complex(out)
    return out


ARC_KINDS = ("circle", "segment", "line")


@dataclass(frozen=True)
class CircularArc:
    """Arc of a circle, a straight segment, or a line through infinity.

    For a circle the arc runs from ``a`` by the signed ``sweep`` about
    ``center``. A ``line`` arc is the part of the line through a and b that
    avoids the open segment (a, b), i.e. two rays joined at infinity.
    """

    a: complex
    b: complex
    kind: str
    center: complex = 0j
    radius: float = 0.0
    start_angle: float = 0.0
    sweep: float = 0.0

    @classmethod
    def segment(cls, a: complex, b: complex) -> "CircularArc":
        return cls(complex(a), complex(b), "segment")

    @classmethod
    def from_circle(cls, center: complex, radius: float, a: complex, b: complex, sweep: float) -> "CircularArc":
        return cls(complex(a), complex(b), "circle", complex(center), float(radius),
                   float(np.angle(a - center)), float(sweep))

    @property
    def is_finite(self) -> bool:
        return self.kind != "line"

    def point(self, s: Any) -> Any:
        s = np.asarray(s, dtype=float)
        if self.kind == "circle":
            return self.center + self.radius * np.exp(1j * (self.start_angle + s * self.sweep))
        if self.kind == "segment":
            return self.a + s * (self.b - self.a)
        raise ValueError("a line through infinity has no finite parameterization")

    def sample(self, n: int = 64) -> np.ndarray:
        return np.asarray(self.point(np.linspace(0.0, 1.0, max(n, 2))), dtype=complex)

    def polylines(self, n: int = 64, reach: float = 10.0) -> List[np.ndarray]:
        """Finite polylines covering the arc; rays of a line stop at ``reach``."""
        if self.kind != "line":
            return [self.sample(n)]
        u = (self.a - self.b) / abs(self.a - self.b)
        return [np.array([self.a, self.a + u * reach]), np.array([self.b, self.b - u * reach])]

    @property
    def midpoint(self) -> complex:
        if self.kind == "line":
            return complex(math.inf, math.inf)
        return complex(self.point(0.5))

    @property
    def length(self) -> float:
        if self.kind == "circle":
            return self.radius * abs(self.sweep)
        if self.kind == "segment":
            return abs(self.b - self.a)
        return math.inf

    @property
    def diameter(self) -> float:
        if self.kind == "line":
            return math.inf
        if self.kind == "circle" and abs(self.sweep) > math.pi:
            return 2 * self.radius
        return abs(self.b - self.a)

    def tangent(self, at_start: bool = True) -> complex:
        """Unit tangent leaving the arc at its start (or at b, pointing inward)."""
        if self.kind == "circle":
            if at_start:
                return 1j * (self.a - self.center) / self.radius * np.sign(self.sweep)
            return -1j * (self.b - self.center) / self.radius * np.sign(self.sweep)
        u = (self.b - self.a) / abs(self.b - self.a)
        if self.kind == "segment":
            return u if at_start else -u
        return -u if at_start else u

    def side(self, z: Any) -> Any:
        """Signed distance to the supporting circle or line."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "circle":
            return np.abs(z - self.center) - self.radius
        u = (self.b - self.a) / abs(self.b - self.a)
        return cross(u, z - self.a)

    def distance(self, z: complex, n: int = 512) -> float:
        """Distance from z to the arc (sampled for circular arcs)."""
        if self.kind == "circle":
            return float(np.min(np.abs(self.sample(n) - z)))
        u = (self.b - self.a) / abs(self.b - self.a)
        t = float(np.real(np.conj(u) * (z - self.a)))
        length = abs(self.b - self.a)
        if self.kind == "segment":
            t = min(max(t, 0.0), length)
            return abs(z - (self.a + u * t))
        if 0.0 < t < length:
            return min(abs(z - self.a), abs(z - self.b))
        return abs(float(cross(u, z - self.a)))

    def reversed(self) -> "CircularArc":
        if self.kind == "circle":
            return CircularArc(self.b, self.a, "circle", self.center, self.radius,
                               float(np.angle(self.b - self.center)), -self.sweep)
        return CircularArc(self.b, self.a, self.kind)

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "a": [self.a.real, self.a.imag],
                                "b": [self.b.real, self.b.imag]}
        if self.kind == "circle":
            data.update(center=[self.center.real, self.center.imag], radius=self.radius,
                        sweep=self.sweep)
        return data


def perpendicular_arc(ball: Ball, a: complex, b: complex, tol: Optional[float] = None) -> CircularArc:
    """Circle-or-line arc through a and b meeting the ball boundary at right
    angles, restricted to the interior of the ball."""
    tol = settings.tolerance if tol is None else tol
    a, b = complex(a), complex(b)
    if abs(a - b) <= tol:
        raise DegenerateChord(f"chord endpoints coincide at {a}")
    bound = tol * ball.scale
    for p in (a, b):
        dist = float(ball.boundary_distance(p))
        if dist > bound:
            raise NotOnBoundary(f"{p} is {dist:.3e} away from the ball boundary")

    if ball.kind == "half-plane":
        center = (a + b) / 2
        radius = abs(a - b) / 2
        start = float(np.angle(a - center))
        sweep = math.pi
        if abs(np.exp(1j * (start + sweep / 2)) - ball.normal) > 1.0:
            sweep = -math.pi
        return CircularArc(a, b, "circle", center, radius, start, sweep)

    c, r = ball.center, ball.radius
    ua, ub = (a - c) / abs(a - c), (b - c) / abs(b - c)
    theta = abs(float(np.angle(ub / ua)))
    if math.pi - theta <= 1e-9:
        return CircularArc(a, b, "segment" if ball.kind == "disk" else "line")
    m = (ua + ub) / abs(ua + ub)
    center = c + m * r / math.cos(theta / 2)
    radius = r * math.tan(theta / 2)
    start = float(np.angle(a - center))
    sweep = float(wrap_angle(np.angle(b - center) - start))
    if ball.kind == "exterior-disk":
        sweep = sweep - math.copysign(2 * math.pi, sweep)
    return CircularArc(a, b, "circle", center, radius, start, sweep)


def crossing_angle_error(ball: Ball, arc: CircularArc) -> float:
    """Largest deviation from a right angle where the arc meets the boundary."""
    worst = 0.0
    for at_start, p in ((True, arc.a), (False, arc.b)):
        t = arc.tangent(at_start)
        boundary_dir = 1j * ball.inward_normal(p)
        cos_angle = min(1.0, abs(float(np.real(np.conj(t) * boundary_dir))))
        worst = max(worst, abs(math.pi / 2 - math.acos(cos_angle)))
    return worst


def polyline_length(z: np.ndarray) -> float:
    return float(np.sum(np.abs(np.diff(z))))


def segment_crossings(path: np.ndarray, other: np.ndarray, tangency_angle: Optional[float] = None,
                      tol: Optional[float] = None) -> Tuple[List[Tuple[float, int, float]], bool]:
    """Transversal intersections of two polylines.

    Returns ``(events, tangential)`` where each event is ``(position, j, u)``:
    ``position`` is the segment index of ``path`` plus the local parameter in
    [0, 1), ``j``/``u`` locate the hit on ``other``. ``tangential`` is set
    when some hit is too shallow, lands on a vertex, or runs along a shared
    segment.
    """
    tangency_angle = settings.tangency_angle if tangency_angle is None else tangency_angle
    tol = settings.tolerance if tol is None else tol
    path = np.asarray(path, dtype=complex)
    other = np.asarray(other, dtype=complex)
    events: List[Tuple[float, int, float]] = []
    tangential = False
    if path.size < 2 or other.size < 2:
        return events, tangential

    p0, d = path[:-1], np.diff(path)
    q0, e = other[:-1], np.diff(other)
    dn, en = np.abs(d), np.abs(e)
    m = q0.size
    last = m - 1
    sin_min = math.sin(tangency_angle)
    chunk = max(1, int(2_000_000 // max(m, 1)))
    for start in range(0, p0.size, chunk):
        sl = slice(start, start + chunk)
        ds, ps, dns = d[sl, None], p0[sl, None], dn[sl, None]
        den = cross(ds, e[None, :])
        w = q0[None, :] - ps
        scale = dns * en[None, :]
        ok = (np.abs(den) > 1e-15 * np.maximum(scale, 1e-300)) & (scale > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(ok, cross(w, e[None, :]) / den, np.nan)
            u = np.where(ok, cross(w, ds) / den, np.nan)
        s_tol = tol / np.maximum(dns, 1e-300)
        u_tol = tol / np.maximum(en[None, :], 1e-300)
        hit = ok & (s >= -s_tol) & (s <= 1 + s_tol) & (u >= -u_tol) & (u <= 1 + u_tol)

        # collinear overlap
        par = (~ok) & (scale > 0)
        if np.any(par):
            offset = np.abs(cross(ds, w)) / np.maximum(dns, 1e-300)
            near = par & (offset <= tol)
            if np.any(near):
                ii, jj = np.nonzero(near)
                for i, j in zip(ii, jj):
                    u_dir = d[start + i] / dn[start + i]
                    s0 = np.real(np.conj(u_dir) * (q0[j] - p0[start + i])) / dn[start + i]
                    s1 = np.real(np.conj(u_dir) * (q0[j] + e[j] - p0[start + i])) / dn[start + i]
                    if max(s0, s1) >= 0 and min(s0, s1) <= 1:
                        tangential = True
        if not np.any(hit):
            continue
        ii, jj = np.nonzero(hit)
        for i, j in zip(ii, jj):
            si, uj = float(s[i, j]), float(u[i, j])
            gi = start + int(i)
            # half-open on the path: a hit at the far vertex belongs to the next segment
            if si >= 1 - s_tol[i, 0] and gi < p0.size - 1:
                continue
            if uj >= 1 - u_tol[0, j] and j < last:
                continue
            sin_angle = abs(float(den[i, j])) / float(scale[i, j])
            if sin_angle < sin_min:
                tangential = True
            if si <= s_tol[i, 0] and gi > 0:
                tangential = True
            if si >= 1 - s_tol[i, 0] and gi == p0.size - 1:
                tangential = True
            if (uj <= u_tol[0, j] and j > 0) or (uj >= 1 - u_tol[0, j] and j < last):
                tangential = True
            events.append((gi + min(max(si, 0.0), 1.0), int(j), min(max(uj, 0.0), 1.0)))
    events.sort()
    return events, tangential
