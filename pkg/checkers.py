"""Identity checks on concrete instances: index = variation + 1, the
lollipop counting identity, hull index, homotopy and junction invariance,
and an index-driven fixed point locator."""

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import shapely
import structlog
from scipy.optimize import root
from shapely.geometry import LineString, Point as ShapelyPoint
from shapely.ops import substring

from config.settings import settings
from curve import OrientedClosedCurve, PolylinePath, densify, vector_hull
from errors import (BoundaryFixedPoint, CertificationFailed, FixedPointOnCurve, HypothesisViolation,
                    InvalidPartition, NoEscape)
from geom import Window, as_point, to_xy
from maps import PlaneMap, homotopy, orientation_class
from models import (FixedPointReport, HomotopyReport, HullIndexReport, IndexVariationReport,
                    InvarianceReport, LollipopReport, xy)
from variation import (_window_for, auto_partition, count_variation, crossings, make_junction,
                       normalize_partition, validate_partition, variation_crosscut, variation_total)
from winding import index

logger = structlog.get_logger()

Map = Callable[[np.ndarray], np.ndarray]


def check_index_variation(f: Map, S: OrientedClosedCurve,
                          partition: Optional[Sequence[float]] = None,
                          seed: Optional[int] = None) -> IndexVariationReport:
    """ind(f, S) and var(f, S) computed independently, compared as integers."""
    if partition is None:
        partition = auto_partition(f, S)
    report = variation_total(f, S, partition, seed)
    ind = index(f, S)
    equal = ind == report.total + 1
    log = logger.info if equal else logger.error
    log("Index and variation compared", index=ind, variation=report.total, arcs=len(report.per_arc))
    return IndexVariationReport(index=ind, variation=report.total, equal=equal, variation_report=report)


def _sampled_into_hull(f: Map, S: OrientedClosedCurve, clause: str) -> None:
    t = np.arange(settings.partition_samples) / settings.partition_samples
    images = np.asarray(f(S.points(t)), dtype=complex)
    grown = S.polygon.buffer(10 * settings.tolerance)
    outside = ~shapely.intersects_xy(grown, images.real, images.imag)
    if np.any(outside):
        k = int(np.argmax(outside))
        raise HypothesisViolation(clause, f"f(S({t[k]:.4f})) = {complex(images[k])} leaves T(S)")


def check_hull_index(f: Map, S: OrientedClosedCurve) -> HullIndexReport:
    """A fixed point free map sending S into T(S) has index 1 on S."""
    _sampled_into_hull(f, S, "image-in-hull")
    ind = index(f, S)
    logger.info("Hull index computed", index=ind)
    return HullIndexReport(index=ind, passed=ind == 1)


def check_homotopy(f0: Map, f1: Map, S: OrientedClosedCurve, levels: int = 10) -> HomotopyReport:
    """Index at each level of the straight-line homotopy from f0 to f1."""
    steps = np.linspace(0.0, 1.0, levels + 1)
    indices = []
    for s in steps:
        if isinstance(f0, PlaneMap) and isinstance(f1, PlaneMap):
            fs = homotopy(f0, f1, float(s))
        else:
            fs = (lambda z, s=float(s): (1 - s) * np.asarray(f0(z)) + s * np.asarray(f1(z)))
        try:
            indices.append(index(fs, S))
        except FixedPointOnCurve as e:
            raise HypothesisViolation("fixed-point-free-homotopy", f"level {s:.3f}: {e}") from e
    constant = len(set(indices)) == 1
    logger.info("Homotopy checked", levels=len(indices), constant=constant)
    return HomotopyReport(levels=steps.tolist(), indices=indices, constant=constant)


def check_junction_invariance(f: Map, S: OrientedClosedCurve, partition: Sequence[float],
                              count: int = 5, seed: Optional[int] = None) -> InvarianceReport:
    """var(f, S) with junctions placed at random points of each arc."""
    arcs = validate_partition(f, S, partition)
    obstacle = S.polygon
    window = _window_for(obstacle)
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    values: List[int] = []
    for trial in range(count):
        total = 0
        for i, arc in enumerate(arcs):
            for _ in range(settings.max_junction_retries):
                v = complex(arc.at(rng.uniform(0.2, 0.8)))
                try:
                    J = make_junction(obstacle, v, window, rng, rotation=float(rng.uniform(-0.2, 0.2)))
                    seq = crossings(f, arc, J, obstacle)
                except NoEscape:
                    continue
                if not seq.tangential:
                    total += count_variation(seq.labels)
                    break
            else:
                raise CertificationFailed(f"no transversal junction on arc {i} in trial {trial}")
        values.append(total)
    agree = len(set(values)) == 1
    logger.info("Junction invariance checked", trials=count, values=values, agree=agree)
    return InvarianceReport(label="junction", values=values, agree=agree)


def check_crosscut_invariance(f: Map, arc: Union[PolylinePath, np.ndarray], X: Any,
                              curves: Sequence[OrientedClosedCurve],
                              seed: Optional[int] = None) -> InvarianceReport:
    """Crosscut variation against X and against closed curves completing it."""
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    values = [variation_crosscut(f, arc, X, rng)]
    for S in curves:
        values.append(variation_crosscut(f, arc, S.polygon, rng))
    agree = len(set(values)) == 1
    logger.info("Crosscut invariance checked", curves=len(curves), values=values, agree=agree)
    return InvarianceReport(label="crosscut", values=values, agree=agree)


# Lollipop

def _partition_index(pts: np.ndarray, t: float, clause: str) -> int:
    gaps = np.abs(np.mod(pts - t + 0.5, 1.0) - 0.5)
    k = int(np.argmin(gaps))
    if gaps[k] > 1e-6:
        raise HypothesisViolation(clause, f"stick endpoint at parameter {t:.6f} is not a partition point")
    return k


def _loop(vertices: List[np.ndarray], name: str) -> OrientedClosedCurve:
    try:
        return OrientedClosedCurve(np.concatenate(vertices))
    except Exception as e:
        raise HypothesisViolation("stick-loop", f"{name} loop is not a simple counterclockwise curve: {e}") from e


def check_lollipop(f: Map, S: OrientedClosedCurve, partition: Sequence[float],
                   stick: Union[PolylinePath, np.ndarray], seed: Optional[int] = None) -> LollipopReport:
    """Counting identity for a stick I in T(S) joining partition points
    a_0 and a_{n+1}: the arcs on the side holding f(a_{n+1}) carry total
    variation ind(f, boundary of that side) - 1."""
    tol = settings.tolerance
    I = stick if isinstance(stick, PolylinePath) else PolylinePath(stick)
    try:
        validate_partition(f, S, partition)
    except InvalidPartition as e:
        raise HypothesisViolation("partition", str(e)) from e
    pts = normalize_partition(partition)
    a0, b = I.start, I.end
    t0, t1 = S.param_of(a0), S.param_of(b)
    if S.distance(a0) > 1e-6 or S.distance(b) > 1e-6:
        raise HypothesisViolation("stick-endpoints", "stick must start and end on S")
    k0 = _partition_index(pts, t0, "stick-endpoints")
    k1 = _partition_index(pts, t1, "stick-endpoints")
    m1 = pts.size
    split = (k1 - k0) % m1

    line = I.line
    inner = substring(line, 1e-6 * line.length, line.length * (1 - 1e-6))
    if inner.intersects(S.ring) or not S.polygon.buffer(tol).covers(line):
        raise HypothesisViolation("stick-in-hull", "stick must lie in T(S) and meet S only at its endpoints")

    try:
        ind_s = index(f, S)
    except FixedPointOnCurve as e:
        raise HypothesisViolation("fixed-point-free", str(e)) from e
    if ind_s != 0:
        raise HypothesisViolation("fixed-point-free", f"ind(f, S) = {ind_s} forces a fixed point in T(S)")
    minx, miny, maxx, maxy = S.polygon.bounds
    gx, gy = np.meshgrid(np.linspace(minx, maxx, 48), np.linspace(miny, maxy, 48))
    inside = shapely.contains_xy(S.polygon, gx, gy)
    grid = (gx + 1j * gy)[inside]
    if grid.size and float(np.min(np.abs(np.asarray(f(grid)) - grid))) < settings.fixed_point_threshold:
        raise HypothesisViolation("fixed-point-free", "sampled fixed point inside T(S)")

    rng = np.random.default_rng(settings.seed if seed is None else seed)
    J = make_junction(S.polygon, a0, _window_for(S.polygon), rng)
    path = densify(I.vertices, max(I.length / 512, tol))
    image = LineString(to_xy(np.asarray(f(path), dtype=complex)))
    if image.distance(line) <= 10 * tol or any(image.distance(LineString(to_xy(r))) <= 10 * tol
                                               for r in J.rays.values()):
        raise HypothesisViolation("stick-image", "f(I) meets I or the junction at a_0")

    stick_pts = I.vertices
    R = _loop([S.arc(t0, t1).polyline()[:-1], stick_pts[::-1][:-1]], "R")
    L = _loop([S.arc(t1, t0).polyline()[:-1], stick_pts[:-1]], "L")
    p = complex(f(b))
    where = ShapelyPoint(p.real, p.imag)
    if min(R.polygon.boundary.distance(where), L.polygon.boundary.distance(where)) <= 1e-6:
        raise HypothesisViolation("side", f"f(a_n+1) = {p} is too close to a side boundary")
    if R.polygon.contains(where):
        side, loop = "R", R
    elif L.polygon.contains(where):
        side, loop = "L", L
    else:
        raise HypothesisViolation("side", f"f(a_n+1) = {p} lies outside T(S)")

    report = variation_total(f, S, pts, seed)
    per_arc = [report.per_arc[(k0 + j) % m1] for j in range(m1)]
    counted = list(range(split)) if side == "R" else list(range(split, m1))
    total = sum(per_arc[j] for j in counted)
    rhs = index(f, loop)
    negative = [j for j in counted if per_arc[j] < 0]
    holds = total + 1 == rhs
    log = logger.info if holds else logger.error
    log("Lollipop checked", side=side, variation_sum=total, index=rhs, negative_arcs=negative)
    return LollipopReport(side=side, variation_sum=total, lhs=total + 1, rhs=rhs, identity_holds=holds,
                          per_arc=per_arc, index=ind_s, negative_arcs=negative,
                          corollary_holds=bool(negative) if ind_s == 0 else None)


# Fixed point location

def _box_curve(box: Window) -> OrientedClosedCurve:
    return OrientedClosedCurve.rectangle(box)


def _polish(f: Map, z0: complex) -> Tuple[complex, float]:
    def F(v: np.ndarray) -> List[float]:
        z = complex(v[0], v[1])
        d = complex(np.asarray(f(np.array([z])))[0]) - z
        return [d.real, d.imag]

    start = abs(complex(np.asarray(f(np.array([z0])))[0]) - z0)
    if start <= settings.refine_xatol:
        return z0, start
    sol = root(F, [z0.real, z0.imag], method="hybr", tol=settings.refine_xatol)
    z = complex(sol.x[0], sol.x[1])
    residual = abs(complex(np.asarray(f(np.array([z])))[0]) - z)
    if not np.isfinite(residual) or residual > start:
        return z0, start
    return z, residual


def _split(box: Window, rng: np.random.Generator) -> List[Window]:
    cx = box.xmin + rng.uniform(0.4, 0.6) * box.width
    cy = box.ymin + rng.uniform(0.4, 0.6) * box.height
    return [Window(box.xmin, box.ymin, cx, cy), Window(cx, box.ymin, box.xmax, cy),
            Window(box.xmin, cy, cx, box.ymax), Window(cx, cy, box.xmax, box.ymax)]


def _children(f: Map, box: Window, ind: int, rng: np.random.Generator) -> List[Tuple[Window, int]]:
    """Quarter the box at jittered cuts until every child boundary misses the fixed point set."""
    last: Optional[FixedPointOnCurve] = None
    for _ in range(settings.max_cut_retries):
        quarters = _split(box, rng)
        try:
            indices = [index(f, _box_curve(q)) for q in quarters]
        except FixedPointOnCurve as e:
            last = e
            logger.debug("Cut hit a fixed point, jittering", box=box.to_json())
            continue
        if sum(indices) != ind:
            logger.warning("Index not additive over cut", box=box.to_json(), parent=ind, children=indices)
        return [(q, k) for q, k in zip(quarters, indices) if k != 0]
    raise BoundaryFixedPoint(f"every cut of {box.to_json()} passes through a fixed point: {last}")


def locate_fixed_points(f: Map, box: Union[Window, Sequence[float]], tol: Optional[float] = None,
                        seed: Optional[int] = None, iterate: int = 1) -> FixedPointReport:
    """Quadtree search for fixed points of f in a box, driven by boundary index.

    Boxes of index zero are dropped without any claim about them. A box of
    index +-1 is polished with a root finder; larger indices and failed
    polishes are quartered again. A fixed point on the outer boundary is
    polished and reported directly.
    """
    box = box if isinstance(box, Window) else Window(*box)
    tol = settings.tolerance if tol is None else tol
    rng = np.random.default_rng(settings.seed if seed is None else seed)
    try:
        ind = index(f, _box_curve(box))
    except FixedPointOnCurve as e:
        start = e.point if e.point is not None else box.center
        z, residual = _polish(f, start)
        if residual >= 10 * max(tol, 1e-9):
            raise BoundaryFixedPoint(f"fixed point on the box boundary near {start} did not polish") from e
        logger.info("Fixed point on box boundary", point=xy(z), residual=residual)
        return FixedPointReport(status="found", box=box.to_json(), boundary_index=None,
                                points=[xy(z)], residuals=[residual], leaves=0, iterate=iterate)
    if ind == 0:
        logger.info("Box index is zero", box=box.to_json())
        return FixedPointReport(status="absent", box=box.to_json(), boundary_index=0, iterate=iterate)

    leaves: List[Window] = []
    stack: List[Tuple[Window, int, int]] = [(box, ind, 0)]
    while stack:
        b, k, depth = stack.pop()
        if abs(k) == 1 or b.diameter < tol or depth >= settings.max_subdivision_depth:
            leaves.append(b)
            continue
        for child, ck in _children(f, b, k, rng):
            stack.append((child, ck, depth + 1))

    def refine(leaf: Window) -> Optional[Tuple[complex, float]]:
        z, residual = _polish(f, leaf.center)
        if not leaf.expanded(1.1).contains(z):
            return None
        return z, residual

    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        refined = list(pool.map(refine, leaves))
    found: List[Tuple[complex, float]] = []
    bound = 10 * max(tol, 1e-9)
    for item in refined:
        if item is None or item[1] >= bound:
            continue
        if all(abs(item[0] - z) > 1e3 * bound for z, _ in found):
            found.append(item)
    found.sort(key=lambda item: (item[0].real, item[0].imag))
    logger.info("Fixed points located", boundary_index=ind, leaves=len(leaves), points=len(found))
    return FixedPointReport(status="found" if found else "absent", box=box.to_json(), boundary_index=ind,
                            points=[xy(z) for z, _ in found], residuals=[r for _, r in found],
                            leaves=len(leaves), iterate=iterate)


def locate_fixed_point(f: Map, box: Union[Window, Sequence[float]],
                       tol: Optional[float] = None) -> Optional[complex]:
    """First located fixed point, or None (which is not a proof of absence)."""
    report = locate_fixed_points(f, box, tol)
    return as_point(report.points[0]) if report.points else None


def _second_iterate(f: Map) -> Map:
    if isinstance(f, PlaneMap):
        return f.iterate(2)
    return lambda z: f(f(z))


def check_period_two(f: Map, box: Union[Window, Sequence[float]],
                     tol: Optional[float] = None) -> FixedPointReport:
    """Fixed points of f∘f."""
    return locate_fixed_points(_second_iterate(f), box, tol, iterate=2)


def check_oriented_fixed_point(f: PlaneMap, X: Any, window: Optional[Window] = None,
                               trials: int = 50, tol: Optional[float] = None) -> FixedPointReport:
    """A map sending X into T(X) with sampled positive orientation should
    fix a point of T(X); negative orientation falls back to period two."""
    geom = vector_hull(X)
    minx, miny, maxx, maxy = geom.bounds
    pad = 0.05 * max(maxx - minx, maxy - miny, 1e-6)
    box = Window(minx - pad, miny - pad, maxx + pad, maxy + pad)
    edge = shapely.segmentize(geom.boundary, box.diameter / settings.partition_samples)
    coords = shapely.get_coordinates(edge)
    z = coords[:, 0] + 1j * coords[:, 1]
    images = np.asarray(f(z), dtype=complex)
    grown = geom.buffer(10 * settings.tolerance)
    if not np.all(shapely.intersects_xy(grown, images.real, images.imag)):
        raise HypothesisViolation("image-in-hull", "f(X) leaves T(X)")

    profile = orientation_class(f, trials=trials, window=window or box.expanded(1.5))
    if profile.classification == "positive":
        report = locate_fixed_points(f, box, tol)
    elif profile.classification == "negative":
        report = check_period_two(f, box, tol)
    else:
        raise HypothesisViolation("orientation", f"sampled orientation is {profile.classification}")
    kept = [(p, r) for p, r in zip(report.points, report.residuals)
            if grown.buffer(10 * max(tol or settings.tolerance, 1e-9)).covers(ShapelyPoint(*p))]
    logger.info("Oriented fixed point check", orientation=profile.classification, points=len(kept))
    return report.model_copy(update={"points": [p for p, _ in kept], "residuals": [r for _, r in kept],
                                     "status": "found" if kept else "absent"})
