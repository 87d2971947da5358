"""Maximal-ball partition of the complement of a compactum: balls, contact
sets, hyperbolic hulls and their chords, signed chord families, auxiliary
continua and outchannel scanning."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import shapely
import structlog
from scipy import ndimage
from scipy.spatial import ConvexHull, Voronoi, cKDTree
from shapely.geometry import LineString, Polygon, box
from shapely.geometry.base import BaseGeometry
from shapely.ops import unary_union

from config.settings import settings
from curve import Region, burn_polyline, rasterize, shadow_of, vector_hull
from errors import (ArcImageOverlap, ChordImageOverlap, DegenerateChord, DisconnectedComplement,
                    EmptyInput, EndpointOnJunction, InvalidPartition, NoChord, NoEscape,
                    UnresolvedTangency)
from geom import (Ball, CircularArc, Window, as_point, as_points, circumcircle, invert,
                  min_enclosing_ball, perpendicular_arc, to_xy, wrap_angle)
from models import ChordClassification, OutchannelChain, PartitionSummary, xy
from variation import variation_crosscut

logger = structlog.get_logger()


@dataclass
class KPElement:
    """Hyperbolic hull of the contact set of one maximal ball."""

    ball: Ball
    clusters: List[List[complex]]
    chords: List[CircularArc]
    signs: List[int]
    source: str = ""

    @property
    def contacts(self) -> List[complex]:
        return [p for cluster in self.clusters for p in cluster]

    @property
    def has_interior(self) -> bool:
        return len(self.contacts) >= 3

    @property
    def is_gap(self) -> bool:
        return self.has_interior

    def hull_contains(self, p: Any, margin: float = 0.0) -> bool:
        """p lies inside the hull, at least ``margin`` away from its boundary
        (a negative margin admits points near the boundary)."""
        if not self.has_interior:
            return False
        p = as_point(p)
        if float(self.ball.signed_depth(p)) <= margin:
            return False
        for arc, sign in zip(self.chords, self.signs):
            if sign * float(arc.side(p)) <= margin:
                return False
        return True

    def covers(self, p: Any, tol: float = 1e-6) -> bool:
        """p is in the closed hull, chords included."""
        if self.hull_contains(p, -tol):
            return True
        p = as_point(p)
        return any(arc.distance(p, 2048) <= tol for arc in self.chords)

    def to_json(self) -> Dict[str, Any]:
        return {"ball": self.ball.to_json(), "source": self.source,
                "clusters": [[xy(p) for p in c] for c in self.clusters]}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "KPElement":
        ball = Ball.from_json(data["ball"])
        clusters = [[as_point(p) for p in c] for c in data["clusters"]]
        return assemble_element(ball, clusters, data.get("source", ""))


@dataclass
class KPChord:
    id: int
    element: int
    arc: CircularArc

    @property
    def endpoints(self) -> Tuple[complex, complex]:
        return self.arc.a, self.arc.b

    @property
    def diameter(self) -> float:
        return self.arc.diameter

    def path(self, n: int = 128) -> np.ndarray:
        return self.arc.sample(n)


@dataclass
class SignedChord:
    chord: KPChord
    variation: int

    @property
    def diameter(self) -> float:
        return self.chord.diameter


@dataclass
class KPPartition:
    """Elements found for a compactum, with the boundary samples used."""

    elements: List[KPElement]
    samples: np.ndarray
    window: Window
    h: float
    geometry: BaseGeometry = field(repr=False, default=None)

    def chords(self) -> List[KPChord]:
        out: List[KPChord] = []
        for i, e in enumerate(self.elements):
            for arc in e.chords:
                out.append(KPChord(len(out), i, arc))
        return out

    def locate(self, p: Any) -> KPElement:
        """Maximal ball whose hull holds p, found by inverting about p."""
        p = as_point(p)
        w = invert(self.samples, p)
        D = min_enclosing_ball(w)
        phase = float(np.angle(p - D.center)) if abs(p - D.center) > 0 else 0.0
        ring = D.center + D.radius * np.exp(1j * (phase + np.array([2, 3, 4]) * np.pi / 3))
        back = invert(ring, p)
        gap = abs(abs(p - D.center) - D.radius)
        if gap <= 1e-9 * D.radius:
            a, b = back[0], back[2]
            t = (b - a) / abs(b - a)
            n = 1j * t
            if float(np.real(np.conj(n) * (p - a))) < 0:
                n = -n
            ball = Ball.half_plane(a, n)
        else:
            circ = circumcircle(complex(back[0]), complex(back[1]), complex(back[2]))
            if circ is None:
                raise EmptyInput(f"inversion about {p} gave a degenerate circle")
            kind = "disk" if abs(p - D.center) < D.radius else "exterior-disk"
            ball = Ball(kind, center=circ[0], radius=float(circ[1]))
        tol = 1e-7 * max(1.0, ball.scale)
        dist = np.asarray(ball.boundary_distance(self.samples))
        touching = self.samples[dist <= tol]
        element = assemble_element(ball, cluster_contacts(ball, touching, dist[dist <= tol], self.h), "located")
        logger.debug("Point located", point=xy(p), kind=ball.kind, contacts=len(element.contacts))
        return element

    def summary(self) -> PartitionSummary:
        kinds: Dict[str, int] = {}
        for e in self.elements:
            kinds[e.ball.kind] = kinds.get(e.ball.kind, 0) + 1
        return PartitionSummary(elements=len(self.elements),
                                with_interior=sum(1 for e in self.elements if e.has_interior),
                                by_kind=kinds, gaps=sum(1 for e in self.elements if e.is_gap),
                                chords=sum(len(e.chords) for e in self.elements), spacing=self.h)

    def interior_elements(self) -> List[KPElement]:
        return [e for e in self.elements if e.has_interior]

    def to_json(self) -> Dict[str, Any]:
        return {"window": self.window.to_json(), "h": self.h,
                "elements": [e.to_json() for e in self.elements]}

    @classmethod
    def from_json(cls, data: Dict[str, Any], K: BaseGeometry) -> "KPPartition":
        window = Window(*data["window"])
        h = float(data["h"])
        return cls([KPElement.from_json(e) for e in data["elements"]], boundary_samples(K, h), window, h, K)


# Contact sets

def cluster_contacts(ball: Ball, pts: np.ndarray, dist: np.ndarray, h: float) -> List[List[complex]]:
    """Group points near the ball boundary and pick representatives among
    those lying on it: the closest point of a short cluster, or start/middle/end
    of an extended one. A group with no point on the boundary is dropped."""
    if pts.size == 0:
        return []
    pos = np.asarray(ball.boundary_position(pts), dtype=float)
    scale = ball.radius if ball.is_circle else 1.0
    order = np.argsort(pos)
    pos, pts, dist = pos[order], pts[order], dist[order]
    split = 2.5 * h
    gaps = np.diff(pos) * scale
    cuts = list(np.nonzero(gaps > split)[0] + 1)
    groups = np.split(np.arange(pts.size), cuts)
    if ball.is_circle and len(groups) > 1:
        wrap = (pos[0] + 2 * np.pi - pos[-1]) * scale
        if wrap <= split:
            groups = [np.concatenate([groups[-1], groups[0]])] + groups[1:-1]
    elif ball.is_circle and len(groups) == 1:
        full_gaps = np.append(gaps, (pos[0] + 2 * np.pi - pos[-1]) * scale)
        k = int(np.argmax(full_gaps))
        if full_gaps[k] <= split:
            # K runs all the way round: no gap, no chord
            return []
        groups = [np.roll(np.arange(pts.size), -(k + 1))]

    clusters: List[List[complex]] = []
    exact = 1e-7 * ball.scale
    for g in groups:
        tight = g[dist[g] <= exact]
        if tight.size == 0:
            # near misses bridge a cluster but never stand in for a contact
            continue
        ends = pts[tight]
        span = abs(ends[-1] - ends[0]) if ball.kind == "half-plane" else \
            abs(float(wrap_angle(pos[tight[-1]] - pos[tight[0]]))) * scale
        if tight.size >= 3 and span > 2 * h:
            mid = tight[tight.size // 2]
            clusters.append([ball.project(complex(pts[tight[0]])), ball.project(complex(pts[mid])),
                             ball.project(complex(pts[tight[-1]]))])
        else:
            best = tight[int(np.argmin(dist[tight]))]
            clusters.append([ball.project(complex(pts[best]))])
    return clusters


def assemble_element(ball: Ball, clusters: List[List[complex]], source: str = "") -> KPElement:
    """Chords between circularly consecutive clusters, each with the sign of
    the side holding the remaining contacts."""
    chords: List[CircularArc] = []
    signs: List[int] = []
    n = len(clusters)
    pairs: List[Tuple[complex, complex]] = []
    if n == 1 and len(clusters[0]) > 1:
        pairs = [(clusters[0][-1], clusters[0][0])]
    elif n == 2 and len(clusters[0]) == 1 and len(clusters[1]) == 1:
        pairs = [(clusters[0][0], clusters[1][0])]
    elif n >= 2:
        pairs = [(clusters[k][-1], clusters[(k + 1) % n][0]) for k in range(n)]
    contacts = [p for c in clusters for p in c]
    for a, b in pairs:
        try:
            arc = perpendicular_arc(ball, a, b, tol=1e-6)
        except DegenerateChord:
            continue
        others = [p for p in contacts if abs(p - a) > 1e-12 and abs(p - b) > 1e-12]
        sign = 0
        if others:
            side = np.asarray(arc.side(np.array(others)))
            k = int(np.argmax(np.abs(side)))
            sign = 1 if side[k] > 0 else -1
        chords.append(arc)
        signs.append(sign)
    return KPElement(ball, clusters, chords, signs, source)


def hyperbolic_hull(ball: Ball, contacts: Sequence[Any]) -> KPElement:
    """Hull of a finite contact set on the ball boundary."""
    pts = as_points(list(contacts))
    dist = np.asarray(ball.boundary_distance(pts))
    return assemble_element(ball, cluster_contacts(ball, pts, dist, 0.0), "contacts")


# Partition construction

def boundary_samples(K: BaseGeometry, h: float) -> np.ndarray:
    parts = []
    for part in shapely.get_parts(K):
        if part.geom_type == "Polygon":
            parts.append(shapely.segmentize(part.exterior, h))
        elif part.geom_type == "Point":
            parts.append(part)
        else:
            parts.append(shapely.segmentize(part, h))
    xyz = np.concatenate([shapely.get_coordinates(p) for p in parts])
    z = xyz[:, 0] + 1j * xyz[:, 1]
    key = np.round(z.real / (1e-9 + h * 1e-6)) + 1j * np.round(z.imag / (1e-9 + h * 1e-6))
    _, keep = np.unique(key, return_index=True)
    return z[np.sort(keep)]


def _check_complement(K: BaseGeometry, window: Window) -> None:
    res = settings.kp_boundary_divisions / max(window.width, window.height)
    mask = rasterize(K, window, res)
    _, count = ndimage.label(~mask)
    if count > 1:
        raise DisconnectedComplement(f"compactum separates the plane into {count} components")


def _element_for_ball(ball: Ball, tree: cKDTree, samples: np.ndarray, h: float, source: str) -> Optional[KPElement]:
    reach = h + 1e-9
    if ball.is_circle and ball.kind == "disk":
        idx = tree.query_ball_point([ball.center.real, ball.center.imag], ball.radius + reach)
        cand = samples[np.asarray(idx, dtype=int)] if idx else samples[:0]
    else:
        cand = samples
    dist = np.asarray(ball.boundary_distance(cand))
    near = dist <= reach
    pts, dist = cand[near], dist[near]
    if pts.size < 2 or float(np.max(np.abs(pts - pts[0]))) <= 2.5 * h:
        return None
    clusters = cluster_contacts(ball, pts, dist, h)
    if len(clusters) < 2 and not (len(clusters) == 1 and len(clusters[0]) > 1):
        return None
    element = assemble_element(ball, clusters, source)
    if not element.chords:
        return None
    return element


def _is_collinear(z: np.ndarray) -> Tuple[bool, complex, complex]:
    c = z.mean()
    pts = to_xy(z - c)
    _, s, vt = np.linalg.svd(pts, full_matrices=False)
    direction = complex(vt[0, 0], vt[0, 1])
    flat = z.size < 3 or s[1] <= 1e-9 * max(s[0], 1e-300)
    return flat, c, direction


def maximal_balls(K: Any, window: Window, h: Optional[float] = None) -> KPPartition:
    """Maximal empty balls of the complement of K with their hulls."""
    geom = K.geometry if isinstance(K, Region) else K
    if geom is None or geom.is_empty:
        raise EmptyInput("compactum is empty")
    h = window.width / settings.kp_boundary_divisions if h is None else h
    _check_complement(geom, window)
    samples = boundary_samples(geom, h)
    if samples.size == 0:
        raise EmptyInput("compactum has no boundary samples")
    tree = cKDTree(to_xy(samples))
    elements: List[KPElement] = []
    seen = set()

    def add(ball: Ball, source: str) -> None:
        if ball.is_circle:
            key = (ball.kind, round(ball.center.real / (h / 4)), round(ball.center.imag / (h / 4)),
                   round(ball.radius / (h / 4)))
        else:
            key = (ball.kind, round(ball.normal.real, 6), round(ball.normal.imag, 6),
                   round(float(np.real(np.conj(ball.normal) * ball.anchor)) / (h / 4)))
        if key in seen:
            return
        seen.add(key)
        e = _element_for_ball(ball, tree, samples, h, source)
        if e is None:
            return
        if len(e.contacts) == 2:
            # two-contact balls sharing a contact pair differ by their chord
            arc = e.chords[0]
            if (arc.a.real, arc.a.imag) > (arc.b.real, arc.b.imag):
                arc = arc.reversed()
            pair = tuple(sorted((round(p.real / (2 * h)), round(p.imag / (2 * h))) for p in e.contacts)) \
                + (round(float(np.angle(arc.tangent(True))) / 0.05),)
            if pair in seen:
                return
            seen.add(pair)
        elements.append(e)

    meb = min_enclosing_ball(samples)
    flat, center, direction = _is_collinear(samples)
    if flat:
        normal = 1j * direction
        add(Ball.half_plane(center, normal), "supporting-line")
        add(Ball.half_plane(center, -normal), "supporting-line")
        if meb.radius > 0:
            add(Ball("exterior-disk", center=meb.center, radius=meb.radius), "exterior")
        along = np.real(np.conj(direction) * (samples - center))
        order = np.argsort(along)
        ordered = samples[order]
        for p, q in zip(ordered[:-1], ordered[1:]):
            d = abs(q - p)
            if d <= 2.5 * h:
                continue
            m = (p + q) / 2
            for off in (0.5, -0.5, 1.0, -1.0, 2.0, -2.0):
                c = m + normal * off * d
                r = abs(c - p)
                if tree.query_ball_point([c.real, c.imag], r * (1 - 1e-9) - h):
                    continue
                add(Ball("disk", center=c, radius=r), "bisector")
    else:
        hull = ConvexHull(to_xy(samples))
        for eq in hull.equations:
            n = complex(eq[0], eq[1])
            anchor = -eq[2] * n
            add(Ball.half_plane(anchor, n), "convex-hull")
        if meb.radius > 0:
            add(Ball("exterior-disk", center=meb.center, radius=meb.radius), "exterior")

        vor = Voronoi(to_xy(samples), qhull_options="Qbb Qc Qz")
        vertices = vor.vertices[:, 0] + 1j * vor.vertices[:, 1]
        ridges = np.asarray([r for r in vor.ridge_vertices if -1 not in r], dtype=int).reshape(-1, 2)
        mids = (vertices[ridges[:, 0]] + vertices[ridges[:, 1]]) / 2 if ridges.size else vertices[:0]
        for source, centers in (("voronoi-vertex", vertices), ("voronoi-ridge", mids)):
            if centers.size == 0:
                continue
            inside = window.contains(centers, margin=h)
            centers = centers[inside]
            outside_k = ~shapely.intersects_xy(geom, centers.real, centers.imag)
            centers = centers[outside_k]
            if centers.size == 0:
                continue
            radii, _ = tree.query(to_xy(centers))
            for c, r in zip(centers, radii):
                if r > 2 * h:
                    add(Ball("disk", center=complex(c), radius=float(r)), source)

    logger.info("Maximal balls found", elements=len(elements), samples=int(samples.size), spacing=h,
                collinear=flat)
    return KPPartition(elements, samples, window, h, geom)


def hull_of(e: KPElement, window: Optional[Window] = None, n: int = 64) -> Tuple[List[CircularArc], BaseGeometry]:
    """Chords of an element and its hull as a polygon (clipped to the window
    when the hull is unbounded)."""
    if not e.has_interior:
        return e.chords, Polygon()
    ring: List[complex] = []
    k = len(e.clusters)
    arcs = {(arc.a, arc.b): arc for arc in e.chords}
    for i, cluster in enumerate(e.clusters):
        if len(cluster) > 1:
            ring.extend(_boundary_run(e.ball, cluster[0], cluster[-1], cluster[len(cluster) // 2], n))
        else:
            ring.append(cluster[0])
        a, b = cluster[-1], e.clusters[(i + 1) % k][0]
        arc = arcs.get((a, b))
        if arc is not None:
            reach = 4 * (window.diameter if window else 10.0)
            for piece in arc.polylines(n, reach):
                ring.extend(piece[1:-1] if arc.is_finite else piece)
    poly = Polygon(to_xy(np.asarray(ring))).buffer(0)
    if e.ball.kind == "exterior-disk" and window is not None:
        frame = box(*window.expanded(4.0).to_json())
        return e.chords, frame.difference(poly)
    return e.chords, poly


def _boundary_run(ball: Ball, a: complex, b: complex, via: complex, n: int) -> List[complex]:
    if ball.kind == "half-plane":
        return list(np.linspace(a, b, n))
    t0 = float(np.angle(a - ball.center))
    sweep = float(np.mod(np.angle(b - ball.center) - t0, 2 * np.pi))
    through = float(np.mod(np.angle(via - ball.center) - t0, 2 * np.pi))
    if through > sweep:
        sweep -= 2 * np.pi
    return list(ball.center + ball.radius * np.exp(1j * (t0 + sweep * np.linspace(0, 1, n))))


# Chord families

@dataclass
class ChordFamily:
    """C(a, b): a single chord or the closed disk between two extreme chords."""

    kind: str
    chords: List[KPChord]
    extremes: List[KPChord]


def chords_between(P: KPPartition, a: Any, b: Any, tol: Optional[float] = None) -> ChordFamily:
    a, b = as_point(a), as_point(b)
    tol = 2 * P.h + 1e-9 if tol is None else tol
    if abs(a - b) <= settings.tolerance:
        raise DegenerateChord(f"chord endpoints coincide at {a}")
    found: List[Tuple[float, KPChord]] = []
    base = float(np.angle(b - a))
    for chord in P.chords():
        p, q = chord.endpoints
        if abs(p - a) <= tol and abs(q - b) <= tol:
            arc = chord.arc
        elif abs(q - a) <= tol and abs(p - b) <= tol:
            arc = chord.arc.reversed()
        else:
            continue
        angle = float(wrap_angle(np.angle(arc.tangent(True)) - base))
        found.append((angle, chord))
    if not found:
        raise NoChord(f"no chord joins {a} and {b}")
    found.sort(key=lambda item: item[0])
    distinct = [found[0]]
    for angle, chord in found[1:]:
        if angle - distinct[-1][0] > 1e-6:
            distinct.append((angle, chord))
    chords = [c for _, c in distinct]
    if len(distinct) == 1:
        return ChordFamily("single", chords, chords)
    return ChordFamily("disk", chords, [distinct[0][1], distinct[-1][1]])


@dataclass
class Classification:
    items: List[ChordClassification]
    chords: Dict[int, KPChord]

    def ids(self, sign: str) -> List[int]:
        """'+' and '-' are inclusive of zero variation."""
        out = []
        for item in self.items:
            if item.variation is None:
                continue
            if sign == "all" or (sign == "+" and item.variation >= 0) or (sign == "-" and item.variation <= 0):
                out.append(item.chord_id)
        return out

    @property
    def plus(self) -> List[int]:
        return self.ids("+")

    @property
    def minus(self) -> List[int]:
        return self.ids("-")

    @property
    def zero(self) -> List[int]:
        return [i.chord_id for i in self.items if i.variation == 0]

    @property
    def excluded(self) -> List[int]:
        return [i.chord_id for i in self.items if i.variation is None]

    def signed(self) -> List[SignedChord]:
        return [SignedChord(self.chords[i.chord_id], i.variation) for i in self.items if i.variation is not None]


def _dedupe(chords: List[KPChord], h: float) -> List[KPChord]:
    seen = set()
    out = []
    for c in chords:
        ends = sorted((round(p.real / h), round(p.imag / h)) for p in c.endpoints)
        mid = c.arc.point(0.5) if c.arc.is_finite else complex(0)
        key = (tuple(ends), round(complex(mid).real / h), round(complex(mid).imag / h))
        if key in seen:
            continue
        seen.add(key)
        out.append(c)
    return out


def _classify_one(f, chord: KPChord, K: BaseGeometry, seed: int) -> ChordClassification:
    path = chord.path(256)
    base = dict(chord_id=chord.id, endpoints=[xy(p) for p in chord.endpoints], diameter=float(chord.diameter))
    image = np.asarray(f(path), dtype=complex)
    if LineString(to_xy(path)).distance(LineString(to_xy(image))) <= 10 * settings.tolerance:
        err = ChordImageOverlap(f"chord {chord.id} meets its image")
        logger.warning("Chord excluded", chord=chord.id, reason=str(err))
        return ChordClassification(sign="excluded", **base)
    try:
        value = variation_crosscut(f, path, K, np.random.default_rng([seed, chord.id]))
    except (ArcImageOverlap, InvalidPartition, EndpointOnJunction, UnresolvedTangency, NoEscape) as e:
        logger.warning("Chord excluded", chord=chord.id, reason=f"{type(e).__name__}: {e}")
        return ChordClassification(sign="excluded", **base)
    sign = "+" if value > 0 else "-" if value < 0 else "0"
    return ChordClassification(variation=value, sign=sign, **base)


def classify_chords(f, P: KPPartition, delta: float, eta: float = 0.0,
                    seed: Optional[int] = None) -> Classification:
    """Variation of every finite chord with diameter in [eta, delta]."""
    seed = settings.seed if seed is None else seed
    chords = [c for c in P.chords() if c.arc.is_finite and eta <= c.diameter <= delta]
    chords = _dedupe(chords, P.h)
    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        items = list(pool.map(lambda c: _classify_one(f, c, P.geometry, seed), chords))
    items.sort(key=lambda item: item.chord_id)
    result = Classification(items, {c.id: c for c in chords})
    logger.info("Chords classified", chords=len(items), plus=len(result.plus), minus=len(result.minus),
                excluded=len(result.excluded))
    return result


@dataclass
class AuxiliaryContinuum:
    region: Region
    chord_ids: List[int]
    boundary_loops: int
    boundary_in_generators: bool

    @property
    def simple_boundary(self) -> bool:
        return self.boundary_loops == 1


def auxiliary_continuum(X: BaseGeometry, P: KPPartition, delta: float, sign: str = "all",
                        classification: Optional[Classification] = None,
                        resolution: Optional[float] = None) -> AuxiliaryContinuum:
    """T(X ∪ selected chords) on a grid."""
    if sign not in ("all", "+", "-"):
        raise ValueError(f"sign must be 'all', '+' or '-', got {sign!r}")
    window = P.window
    resolution = resolution or settings.kp_boundary_divisions / max(window.width, window.height)
    if sign == "all":
        chosen = [c for c in P.chords() if c.arc.is_finite and c.diameter <= delta]
    else:
        if classification is None:
            raise ValueError("signed auxiliary continua need a chord classification")
        chosen = [classification.chords[i] for i in classification.ids(sign)
                  if classification.chords[i].diameter <= delta]
    mask = rasterize(X, window, resolution)
    generators = mask.copy()
    for chord in chosen:
        burn_polyline(generators, window, chord.path(256))
    filled = ndimage.binary_fill_holes(generators)
    geometry = unary_union([X] + [LineString(to_xy(c.path(256))) for c in chosen])
    region = Region(window, resolution, filled, geometry, vector_hull(geometry))
    edge = region.boundary_cells()
    _, loops = ndimage.label(edge, structure=np.ones((3, 3), dtype=bool))
    near = ndimage.binary_dilation(generators, iterations=1)
    inside = bool(np.all(near[edge]))
    logger.debug("Auxiliary continuum built", chords=len(chosen), sign=sign, loops=int(loops))
    return AuxiliaryContinuum(region, [c.id for c in chosen], int(loops), inside)


def outchannel_scan(X: BaseGeometry, f, P: KPPartition, delta: float, eta: float = 0.0,
                    classification: Optional[Classification] = None) -> List[OutchannelChain]:
    """Chains of chords with nested shadows, one nonzero sign and
    non-increasing diameters."""
    classification = classification or classify_chords(f, P, delta, eta)
    hull = vector_hull(X)
    chains: List[OutchannelChain] = []
    for sign in ("+", "-"):
        items = [i for i in classification.items if i.sign == sign]
        shadows = []
        for item in items:
            sh = shadow_of(hull, classification.chords[item.chord_id].path(256))
            if not sh.is_empty:
                shadows.append((item, sh))
        shadows.sort(key=lambda s: -s[1].area)
        n = len(shadows)
        nested = [[False] * n for _ in range(n)]
        for i in range(n):
            outer = shadows[i][1].buffer(1e-9)
            for j in range(i + 1, n):
                if shadows[j][1].area < shadows[i][1].area and outer.contains(shadows[j][1]) \
                        and shadows[j][0].diameter <= shadows[i][0].diameter * (1 + 1e-9):
                    nested[i][j] = True
        best = [1] * n
        prev = [-1] * n
        for j in range(n):
            for i in range(j):
                if nested[i][j] and best[i] + 1 > best[j]:
                    best[j], prev[j] = best[i] + 1, i
        has_next = [any(nested[i][j] for j in range(n)) for i in range(n)]
        for j in range(n):
            if has_next[j] or best[j] < 2:
                continue
            seq = []
            k = j
            while k >= 0:
                seq.append(k)
                k = prev[k]
            seq.reverse()
            ids = [shadows[k][0].chord_id for k in seq]
            if any(set(ids) <= set(c.chords) for c in chains if c.sign == sign):
                continue
            chains.append(OutchannelChain(sign=sign, chords=ids,
                                          diameters=[shadows[k][0].diameter for k in seq]))
    if chains:
        logger.warning("Outchannel candidates found", chains=len(chains), heuristic=True)
    return chains
