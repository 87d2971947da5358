"""Junctions and crossing counts: variation of a map on arcs, partitions and
crosscuts."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import shapely
import structlog
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree
from shapely.geometry import LineString, Point as ShapelyPoint
from shapely.geometry.base import BaseGeometry
from shapely.ops import unary_union

from config.settings import settings
from curve import (CurveArc, OrientedClosedCurve, PolylinePath, Region, Traversable, densify,
                   extend_path, grid_shape, rasterize, vector_hull)
from errors import (ArcImageOverlap, EndpointOnJunction, InvalidPartition, NoEscape, NoValidPartition,
                    UnresolvedTangency)
from geom import Window, as_point, segment_crossings, to_xy
from models import JunctionSummary, VariationReport, xy
from winding import lift_field

logger = structlog.get_logger()

LABELS = ("+", "i", "-")
WEDGE_ANGLES = (math.pi / 6, math.pi / 24, math.pi / 96, math.pi / 384)
VERTEX_FRACTIONS = (0.5, 0.25, 0.75, 0.1, 0.9)


@dataclass
class Junction:
    """Three rays from ``vertex``: counterclockwise they are J+, Ji, J-."""

    vertex: complex
    plus: np.ndarray
    inner: np.ndarray
    minus: np.ndarray
    method: str
    rotation: float = 0.0

    @property
    def rays(self) -> Dict[str, np.ndarray]:
        return {"+": self.plus, "i": self.inner, "-": self.minus}

    def summary(self) -> JunctionSummary:
        return JunctionSummary(vertex=xy(self.vertex), method=self.method, rotation=self.rotation)


@dataclass
class CrossingSequence:
    """Transversal crossings of an image path with a junction, in arc order."""

    params: np.ndarray
    labels: List[str]
    tangential: bool = False
    image: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass
class ArcMeasurement:
    value: int
    labels: List[str]
    junction: Junction
    retries: int


def obstacle_of(reference: Any) -> BaseGeometry:
    """T(reference) as vector geometry."""
    if isinstance(reference, OrientedClosedCurve):
        return reference.polygon
    if isinstance(reference, Region):
        if reference.hull_geometry is not None:
            return reference.hull_geometry
        return vector_hull(reference.geometry)
    if isinstance(reference, BaseGeometry):
        return vector_hull(reference)
    raise TypeError(f"cannot build an obstacle from {type(reference).__name__}")


def _window_for(obstacle: BaseGeometry) -> Window:
    minx, miny, maxx, maxy = obstacle.bounds
    return Window.around([complex(minx, miny), complex(maxx, maxy)], margin=0.5)


def _free_direction(obstacle: BaseGeometry, v: complex, radius: float) -> Optional[Tuple[complex, float]]:
    """Middle direction and half-width of the widest free angular interval
    on a small circle about v."""
    n = 720
    phi = 2 * np.pi * np.arange(n) / n
    pts = v + radius * np.exp(1j * phi)
    blocked = shapely.intersects_xy(obstacle, pts.real, pts.imag)
    if np.all(blocked):
        return None
    if not np.any(blocked):
        away = v - as_point(obstacle.centroid)
        return (away / abs(away) if abs(away) > 0 else 1 + 0j), math.pi
    shift = int(np.argmax(blocked))
    free = ~np.roll(blocked, -shift)
    best_len, best_start, k = 0, 0, 0
    while k < n:
        if free[k]:
            j = k
            while j + 1 < n and free[j + 1]:
                j += 1
            if j - k + 1 > best_len:
                best_len, best_start = j - k + 1, k
            k = j + 1
        else:
            k += 1
    mid = 2 * np.pi * (best_start + shift + (best_len - 1) / 2.0) / n
    half = np.pi * best_len / n
    return complex(np.exp(1j * mid)), float(half)


def _extend(ray: np.ndarray, reach: float) -> np.ndarray:
    d = ray[-1] - ray[-2]
    return np.append(ray, ray[-1] + d / abs(d) * reach)


def _rotate(ray: np.ndarray, v: complex, angle: float) -> np.ndarray:
    return v + (ray - v) * np.exp(1j * angle)


def junction_is_valid(obstacle: BaseGeometry, v: complex, rays: Sequence[np.ndarray], radius: float) -> bool:
    """Rays avoid the obstacle away from v, are pairwise disjoint away from v,
    and stay apart outside three shrinking neighbourhoods of v."""
    lines = [LineString(to_xy(r)) for r in rays]
    near_v = ShapelyPoint(v.real, v.imag).buffer(radius, quad_segs=16)
    for line in lines:
        if line.difference(near_v).intersects(obstacle):
            return False
    for scale in (1.0, 0.5, 0.25):
        ball = ShapelyPoint(v.real, v.imag).buffer(radius * scale, quad_segs=16)
        outer = [line.difference(ball) for line in lines]
        for i in range(3):
            for j in range(i + 1, 3):
                if outer[i].intersects(lines[j]) or outer[i].distance(outer[j]) <= 0.0:
                    return False
    return True


def _wedge(v: complex, d: complex, theta: float, length: float) -> List[np.ndarray]:
    return [np.array([v, v + length * d * np.exp(-1j * theta)]),
            np.array([v, v + length * d]),
            np.array([v, v + length * d * np.exp(1j * theta)])]


def _escape_path(obstacle: BaseGeometry, v: complex, d: complex, window: Window) -> Tuple[np.ndarray, float]:
    """Least-cost grid path from just outside v to the window border,
    preferring cells far from the obstacle."""
    res = settings.junction_grid / max(window.width, window.height)
    ny, nx = grid_shape(window, res)
    cw, ch = window.width / nx, window.height / ny
    cell = max(cw, ch)
    blocked = ndimage.binary_dilation(rasterize(obstacle, window, res))
    free = ~blocked
    clearance = ndimage.distance_transform_edt(free)

    def center(r, c):
        return window.xmin + (c + 0.5) * cw + 1j * (window.ymin + (r + 0.5) * ch)

    seed = None
    for steps in (2.5, 3.5, 5.0, 8.0):
        p = v + d * steps * cell
        c = int(math.floor((p.real - window.xmin) / cw))
        r = int(math.floor((p.imag - window.ymin) / ch))
        if not (0 <= r < ny and 0 <= c < nx) or not free[r, c]:
            continue
        q = center(r, c)
        sight = LineString([(v.real, v.imag), (q.real, q.imag)]).difference(
            ShapelyPoint(v.real, v.imag).buffer(0.25 * cell))
        if not sight.intersects(obstacle):
            seed = (r, c)
            break
    if seed is None:
        raise NoEscape(f"no free cell next to {v} at grid spacing {cell:.3g}")

    ids = -np.ones((ny, nx), dtype=np.int64)
    ids[free] = np.arange(int(free.sum()))
    n_free = int(free.sum())
    rows, cols, weights = [], [], []
    for dr, dc in ((0, 1), (1, 0), (1, 1), (1, -1)):
        r0, r1 = max(0, -dr), ny - max(0, dr)
        c0, c1 = max(0, -dc), nx - max(0, dc)
        both = free[r0:r1, c0:c1] & free[r0 + dr:r1 + dr, c0 + dc:c1 + dc]
        ra, ca = np.nonzero(both)
        ra0, ca0 = ra + r0, ca + c0
        rb0, cb0 = ra0 + dr, ca0 + dc
        length = math.hypot(dr * ch, dc * cw)
        clear = np.minimum(clearance[ra0, ca0], clearance[rb0, cb0])
        rows.append(ids[ra0, ca0])
        cols.append(ids[rb0, cb0])
        weights.append(length * (1.0 + 4.0 / clear))
    border = np.zeros_like(free)
    border[0, :] = border[-1, :] = border[:, 0] = border[:, -1] = True
    br, bc = np.nonzero(border & free)
    rows.append(np.full(br.size, n_free))
    cols.append(ids[br, bc])
    weights.append(np.full(br.size, 1e-9))
    graph = coo_matrix((np.concatenate(weights), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(n_free + 1, n_free + 1)).tocsr()
    dist, pred = dijkstra(graph, directed=False, indices=n_free, return_predecessors=True)
    target = ids[seed]
    if not np.isfinite(dist[target]):
        raise NoEscape(f"{v} is not reachable from the unbounded complement")

    flat_r, flat_c = np.nonzero(free)
    chain = []
    node = target
    while node != n_free and node >= 0:
        chain.append(center(flat_r[node], flat_c[node]))
        node = pred[node]
    exit_cell = chain[-1]
    # step straight out through the nearest window side
    sides = [(exit_cell.real - window.xmin, -1 + 0j), (window.xmax - exit_cell.real, 1 + 0j),
             (exit_cell.imag - window.ymin, -1j), (window.ymax - exit_cell.imag, 1j)]
    gap, out = min(sides, key=lambda s: s[0])
    chain.append(exit_cell + out * (gap + 2 * cell))
    path = np.concatenate([[v], np.asarray(chain)])
    simple = LineString(to_xy(path)).simplify(0.5 * cell, preserve_topology=False)
    coords = np.asarray(simple.coords)
    return coords[:, 0] + 1j * coords[:, 1], cell


def _offset_rays(path: np.ndarray, width: float) -> Tuple[np.ndarray, np.ndarray]:
    """Right and left offsets of a path, pinned to its first vertex."""
    seg = np.diff(path)
    u = seg / np.abs(seg)
    normals = np.empty(path.size, dtype=complex)
    normals[0] = 0
    normals[-1] = -1j * u[-1]
    if path.size > 2:
        bis = u[:-1] + u[1:]
        bis = np.where(np.abs(bis) > 1e-12, bis / np.where(np.abs(bis) > 1e-12, np.abs(bis), 1.0), u[1:])
        miter = np.abs(np.real(np.conj(bis) * u[1:]))
        normals[1:-1] = -1j * bis / np.maximum(miter, 0.5)
    return path + width * normals, path - width * normals


def make_junction(reference: Any, v: Any, window: Optional[Window] = None,
                  rng: Optional[np.random.Generator] = None, reach: Optional[float] = None,
                  rotation: float = 0.0) -> Junction:
    """Junction at v whose rays meet T(reference) only at v."""
    v = as_point(v)
    obstacle = obstacle_of(reference)
    window = window or _window_for(obstacle)
    reach = 10 * window.diameter if reach is None else reach

    found = None
    for radius in (1e-3, 1e-2, 1e-4):
        found = _free_direction(obstacle, v, radius * window.diameter)
        if found is not None:
            search_radius = radius * window.diameter
            break
    if found is None:
        raise NoEscape(f"{v} has no free direction out of the compactum")
    d, half = found

    def finish(rays: List[np.ndarray], method: str, radius: float) -> Optional[Junction]:
        rays = [_extend(r, reach) for r in rays]
        if rotation:
            turned = [_rotate(r, v, rotation) for r in rays]
            if junction_is_valid(obstacle, v, turned, radius):
                return Junction(v, *turned, method=method, rotation=rotation)
        if junction_is_valid(obstacle, v, rays, radius):
            return Junction(v, *rays, method=method)
        return None

    # straight wedges along the free direction, then radially from the centroid
    centroid = as_point(obstacle.centroid)
    directions = [d]
    for origin in (centroid, window.center):
        if abs(v - origin) > 1e-12 and np.real(np.conj((v - origin) / abs(v - origin)) * d) > 0:
            directions.append((v - origin) / abs(v - origin))
    for method, direction in zip(("wedge", "radial", "radial"), directions):
        for theta in WEDGE_ANGLES:
            if method == "wedge" and theta >= 0.9 * half:
                continue
            J = finish(_wedge(v, direction, theta, window.diameter), method, search_radius)
            if J is not None:
                logger.debug("Junction built", method=method, theta=theta)
                return J

    path, cell = _escape_path(obstacle, v, d, window)
    width = 0.3 * cell
    for _ in range(4):
        plus, minus = _offset_rays(path, width)
        J = finish([plus, path, minus], "raster", min(search_radius, 0.25 * cell))
        if J is not None:
            logger.debug("Junction built", method="raster", vertices=int(path.size), width=width)
            return J
        width /= 2
    raise NoEscape(f"no valid junction at {v}")


def _image_samples(f, A: Traversable, v: complex, max_chord: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    def field(s: np.ndarray) -> np.ndarray:
        return np.asarray(f(A.at(s)), dtype=complex) - v

    def hit(s: float, norm: float) -> Exception:
        return ArcImageOverlap(f"image of the arc passes within {norm:.3e} of the junction vertex")

    lift = lift_field(field, 0.0, 1.0, breakpoints=A.breakpoints, threshold=10 * settings.tolerance,
                      on_zero=hit, max_angle=math.pi / 8, initial_samples=256,
                      max_chord=max_chord)
    return lift.params, lift.vectors + v


def crossings(f, A: Traversable, J: Junction, hull: Optional[BaseGeometry] = None) -> CrossingSequence:
    """Crossings of the image path f(A) with the junction rays, in arc order."""
    tol = settings.tolerance
    if hull is None and isinstance(A, CurveArc):
        hull = A.parent.polygon
    fa, fb = complex(f(A.at(0.0))), complex(f(A.at(1.0)))
    if hull is not None:
        grown = hull.buffer(10 * tol)
        for which, p in (("start", fa), ("end", fb)):
            if not grown.covers(ShapelyPoint(p.real, p.imag)):
                raise InvalidPartition("image-outside-hull", -1, f"f({which}) = {p}")

    chord = None
    if hull is not None:
        minx, miny, maxx, maxy = hull.bounds
        chord = 0.01 * max(math.hypot(maxx - minx, maxy - miny), 1e-6)
    params, image = _image_samples(f, A, J.vertex, chord)
    arc_path = densify(A.polyline(), max(_path_length(A) / 1024, tol))
    if LineString(to_xy(arc_path)).distance(LineString(to_xy(image))) <= 10 * tol:
        raise ArcImageOverlap("arc meets its own image")

    for label, ray in J.rays.items():
        line = LineString(to_xy(ray))
        for p in (fa, fb):
            if line.distance(ShapelyPoint(p.real, p.imag)) <= 10 * tol:
                raise EndpointOnJunction(f"image endpoint {p} lies on ray {label}")

    events: List[Tuple[float, str]] = []
    tangential = False
    for label, ray in J.rays.items():
        hits, flag = segment_crossings(image, ray)
        tangential = tangential or flag
        for pos, _, _ in hits:
            k = min(int(pos), params.size - 2)
            s = params[k] + (pos - k) * (params[k + 1] - params[k])
            events.append((float(s), label))
    events.sort()
    return CrossingSequence(params=np.array([e[0] for e in events]), labels=[e[1] for e in events],
                            tangential=tangential, image=image)


def _path_length(A: Traversable) -> float:
    return float(np.sum(np.abs(np.diff(A.polyline()))))


def count_variation(labels: Sequence[str]) -> int:
    """+1 for each '+' immediately followed by 'i', -1 for each 'i' followed by '+'."""
    total = 0
    for a, b in zip(labels[:-1], labels[1:]):
        if a == "+" and b == "i":
            total += 1
        elif a == "i" and b == "+":
            total -= 1
    return total


def measure_arc(f, A: Traversable, obstacle: BaseGeometry, window: Window,
                rng: Optional[np.random.Generator] = None, hull: Optional[BaseGeometry] = None) -> ArcMeasurement:
    """Variation on one arc, re-placing the junction when the image path
    touches a ray tangentially."""
    rng = rng or np.random.default_rng(settings.seed)
    hull = obstacle if hull is None else hull
    sample = np.asarray(f(A.at(np.linspace(0, 1, 257))), dtype=complex)
    extent = float(np.max(np.abs(sample - window.center)))
    reach = max(10 * window.diameter, 4 * extent + window.diameter)
    last_error: Optional[Exception] = None
    for attempt in range(settings.max_junction_retries + 1):
        frac = VERTEX_FRACTIONS[attempt % len(VERTEX_FRACTIONS)]
        v = complex(A.at(frac))
        rotation = 0.0 if attempt == 0 else float(rng.uniform(-1, 1) * 0.05)
        try:
            J = make_junction(obstacle, v, window, rng, reach, rotation)
            seq = crossings(f, A, J, hull)
        except (NoEscape, EndpointOnJunction) as e:
            last_error = e
            logger.debug("Junction attempt failed", attempt=attempt, error=str(e))
            continue
        if not seq.tangential:
            return ArcMeasurement(count_variation(seq.labels), seq.labels, J, attempt)
        last_error = UnresolvedTangency(f"tangential contact after {attempt + 1} junctions")
        logger.debug("Tangential crossing, re-placing junction", attempt=attempt)
    if isinstance(last_error, NoEscape):
        raise last_error
    raise UnresolvedTangency(str(last_error))


def variation_arc(f, A: CurveArc, S: Optional[OrientedClosedCurve] = None,
                  rng: Optional[np.random.Generator] = None) -> int:
    """var(f, A, S)."""
    S = S or A.parent
    obstacle = S.polygon
    return measure_arc(f, A, obstacle, _window_for(obstacle), rng).value


def _arcs(S: OrientedClosedCurve, partition: Sequence[float]) -> List[CurveArc]:
    pts = normalize_partition(partition)
    if pts.size == 1:
        return [S.full_arc(pts[0])]
    return [S.arc(pts[i], pts[(i + 1) % pts.size]) for i in range(pts.size)]


def normalize_partition(partition: Sequence[float]) -> np.ndarray:
    pts = np.unique(np.mod(np.asarray(partition, dtype=float), 1.0))
    if pts.size == 0:
        raise InvalidPartition("empty-partition", 0)
    return pts


def validate_partition(f, S: OrientedClosedCurve, partition: Sequence[float]) -> List[CurveArc]:
    """Check f(a_i) in T(S) and f(A_i) disjoint from A_i for every arc."""
    tol = settings.tolerance
    grown = S.polygon.buffer(10 * tol)
    pts = normalize_partition(partition)
    images = np.atleast_1d(f(S.points(pts)))
    outside = ~shapely.intersects_xy(grown, images.real, images.imag)
    if np.any(outside):
        i = int(np.argmax(outside))
        raise InvalidPartition("image-outside-hull", i, f"f(a_{i}) = {complex(images[i])}")
    arcs = _arcs(S, pts)
    for i, arc in enumerate(arcs):
        path = densify(arc.polyline(), S.length / settings.partition_samples)
        image = np.asarray(f(path), dtype=complex)
        if LineString(to_xy(path)).distance(LineString(to_xy(image))) <= 10 * tol:
            raise InvalidPartition("arc-image-overlap", i)
    return arcs


def variation_total(f, S: OrientedClosedCurve, partition: Sequence[float],
                    seed: Optional[int] = None) -> VariationReport:
    """var(f, S) as the sum of per-arc variations over a valid partition."""
    arcs = validate_partition(f, S, partition)
    obstacle = S.polygon
    window = _window_for(obstacle)
    children = np.random.SeedSequence(settings.seed if seed is None else seed).spawn(len(arcs))

    def run(k: int) -> ArcMeasurement:
        try:
            return measure_arc(f, arcs[k], obstacle, window, np.random.default_rng(children[k]))
        except InvalidPartition as e:
            raise InvalidPartition(e.condition, k, str(e)) from e
        except ArcImageOverlap as e:
            raise InvalidPartition("arc-image-overlap", k, str(e)) from e

    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        measured = list(pool.map(run, range(len(arcs))))
    per_arc = [m.value for m in measured]
    report = VariationReport(per_arc=per_arc, total=sum(per_arc),
                             partition=normalize_partition(partition).tolist(),
                             junctions=[m.junction.summary() for m in measured],
                             events=[m.labels for m in measured],
                             retries=[m.retries for m in measured])
    logger.info("Variation computed", arcs=len(arcs), total=report.total,
                retries=int(sum(report.retries)))
    return report


def auto_partition(f, S: OrientedClosedCurve, X: Any = None, max_starts: int = 8) -> np.ndarray:
    """Greedy partition of S whose points map into T(S) and whose arcs
    miss their images; points are restricted to X when given."""
    tol = settings.tolerance
    n = settings.partition_samples
    t = np.union1d(np.arange(n) / n, S.vertex_params)
    z = S.points(t)
    img = np.asarray(f(z), dtype=complex)
    N = t.size

    candidate = shapely.intersects_xy(S.polygon.buffer(10 * tol), img.real, img.imag)
    if X is not None:
        geom = X.geometry if isinstance(X, Region) else X
        scale = max(1.0, math.hypot(geom.bounds[2] - geom.bounds[0], geom.bounds[3] - geom.bounds[1]))
        on_x = shapely.distance(geom, shapely.points(z.real, z.imag)) <= 1e-7 * scale
        candidate &= on_x
    cand = np.nonzero(candidate)[0]
    if cand.size < 2:
        raise NoValidPartition(f"only {cand.size} curve points map into the hull")

    spacing = float(np.max(np.abs(np.diff(np.append(z, z[0])))))
    step = np.abs(np.diff(np.append(img, img[0])))
    local = np.maximum(step, np.roll(step, 1))
    radius = 0.5 * spacing + 0.5 * local + 10 * tol
    tree = cKDTree(np.column_stack([z.real, z.imag]))
    hits = tree.query_ball_point(np.column_stack([img.real, img.imag]), r=radius)
    pk = np.concatenate([np.full(len(h), k) for k, h in enumerate(hits)]) if N else np.array([])
    pm = np.concatenate([np.asarray(h, dtype=int) for h in hits]) if N else np.array([])
    pk, pm = pk.astype(int), pm.astype(int)

    def reach(i: int) -> int:
        """Largest offset j such that samples i..i+j carry no conflicting pair."""
        if pk.size == 0:
            return N
        worst = np.maximum(np.mod(pk - i, N), np.mod(pm - i, N))
        return int(worst.min()) - 1

    cap = min(settings.max_partition_arcs, N)
    starts = cand[np.linspace(0, cand.size - 1, min(max_starts, cand.size)).astype(int)]
    for start in starts:
        points = [int(start)]
        travelled = 0
        ok = False
        while len(points) <= cap:
            cur = points[-1]
            r = reach(cur)
            offsets = np.mod(cand - cur, N)
            remaining = N - travelled
            if r >= remaining and len(points) >= 2:
                ok = True
                break
            allowed = offsets[(offsets > 0) & (offsets <= min(r, remaining - 1))]
            if allowed.size == 0:
                break
            step_to = int(allowed.max())
            if len(points) == 1 and step_to >= remaining - 1:
                # keep at least two points
                step_to = int(allowed[np.argmin(np.abs(allowed - remaining // 2))])
            points.append(int((cur + step_to) % N))
            travelled += step_to
        if not ok:
            continue
        partition = np.sort(t[points])
        try:
            validate_partition(f, S, partition)
        except InvalidPartition as e:
            logger.debug("Greedy partition rejected", start=int(start), error=str(e))
            continue
        logger.info("Partition found", points=int(partition.size), start=int(start))
        return partition
    raise NoValidPartition(f"no partition within {cap} arcs from {len(starts)} starts")


def variation_crosscut(f, Q: Union[PolylinePath, np.ndarray], X: Any,
                       rng: Optional[np.random.Generator] = None) -> int:
    """var(f, Q, X) for a crosscut Q of the compactum X."""
    path = Q if isinstance(Q, PolylinePath) else PolylinePath(Q)
    geom = X.geometry if isinstance(X, Region) else X
    hull = vector_hull(geom)
    cell = 1e-6 * max(1.0, math.hypot(hull.bounds[2] - hull.bounds[0], hull.bounds[3] - hull.bounds[1]))
    line = LineString(to_xy(extend_path(path.vertices, cell)))
    obstacle = vector_hull(unary_union([hull, line]))

    # T(X u Q) must lie on the left of Q
    mid = complex(path.at(0.5))
    k = min(int(0.5 * (path.vertices.size - 1)), path.vertices.size - 2)
    tangent = path.vertices[k + 1] - path.vertices[k]
    inner = mid + 1j * tangent / abs(tangent) * 1e-4 * max(path.length, 1e-9)
    if not obstacle.contains(ShapelyPoint(inner.real, inner.imag)):
        path = path.reversed()
    window = _window_for(obstacle)
    measured = measure_arc(f, path, obstacle, window, rng, hull=obstacle)
    logger.debug("Crosscut variation", value=measured.value, labels="".join(measured.labels))
    return measured.value
