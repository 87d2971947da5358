"""Oriented simple closed curves, counterclockwise arcs, rasterized regions,
topological hulls, crosscuts, shadows and bumping curves."""

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import shapely
import structlog
from scipy import ndimage
from shapely.geometry import LinearRing, LineString, MultiPoint, Point as ShapelyPoint, Polygon
from shapely.geometry.base import BaseGeometry
from shapely.geometry.polygon import orient as orient_polygon
from shapely.ops import nearest_points, polygonize, unary_union

from config.settings import settings
from errors import (BadResolution, FixedPointNearX, MeshTooCoarse, NoContact, NotCounterclockwise,
                    NotSimple, OnCurve, OutsideWindow)
from geom import Window, as_point, as_points, cross, to_xy

logger = structlog.get_logger()


def _dedupe_cyclic(z: np.ndarray, tol: float) -> np.ndarray:
    if z.size > 1 and abs(z[0] - z[-1]) <= tol:
        z = z[:-1]
    keep = np.ones(z.size, dtype=bool)
    keep[1:] = np.abs(np.diff(z)) > tol
    return z[keep]


def signed_area(z: np.ndarray) -> float:
    return 0.5 * float(np.sum(cross(z, np.roll(z, -1))))


class OrientedClosedCurve:
    """Positively oriented simple closed polyline, parameterized by
    normalized arc length t in [0, 1)."""

    def __init__(self, vertices: Iterable[Any], validate: bool = True):
        z = _dedupe_cyclic(as_points(list(vertices)), settings.tolerance)
        if z.size < 3:
            raise NotSimple("a closed curve needs at least three distinct vertices")
        if validate:
            area = signed_area(z)
            if area <= 0:
                raise NotCounterclockwise(f"signed area {area:.6g} is not positive")
            if not LinearRing(to_xy(z)).is_simple:
                raise NotSimple("closed polyline crosses itself")
        self._z = z
        closed = np.append(z, z[0])
        seg = np.abs(np.diff(closed))
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])
        self.length = float(self._cum[-1])

    @classmethod
    def circle(cls, center: complex = 0j, radius: float = 1.0, n: int = 64) -> "OrientedClosedCurve":
        theta = 2 * np.pi * np.arange(n) / n
        return cls(center + radius * np.exp(1j * theta))

    @classmethod
    def rectangle(cls, window: Window) -> "OrientedClosedCurve":
        return cls(window.corners())

    @classmethod
    def from_geometry(cls, geometry: BaseGeometry) -> "OrientedClosedCurve":
        """Boundary of a polygon, reoriented counterclockwise."""
        if geometry.geom_type == "MultiPolygon" and len(geometry.geoms) == 1:
            geometry = geometry.geoms[0]
        if geometry.geom_type != "Polygon":
            raise NotSimple(f"cannot take a simple boundary of a {geometry.geom_type}")
        poly = orient_polygon(Polygon(geometry.exterior), 1.0)
        return cls(np.asarray(poly.exterior.coords)[:-1])

    @property
    def vertices(self) -> np.ndarray:
        return self._z.copy()

    def __len__(self) -> int:
        return int(self._z.size)

    @property
    def vertex_params(self) -> np.ndarray:
        return self._cum[:-1] / self.length

    @property
    def signed_area(self) -> float:
        return signed_area(self._z)

    def points(self, t: Any) -> Any:
        """Curve points at normalized arc-length parameters (vectorized)."""
        t_arr = np.mod(np.asarray(t, dtype=float), 1.0)
        s = t_arr * self.length
        closed = np.append(self._z, self._z[0])
        out = np.interp(s, self._cum, closed.real) + 1j * np.interp(s, self._cum, closed.imag)
        if np.ndim(out) == 0:
            return complex(out)
        return out

    def param_of(self, p: Any) -> float:
        """Parameter of the curve point nearest to p."""
        p = as_point(p)
        a = self._z
        d = np.roll(a, -1) - a
        dd = np.abs(d) ** 2
        u = np.clip(np.real(np.conj(d) * (p - a)) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
        proj = a + u * d
        k = int(np.argmin(np.abs(proj - p)))
        seg = self._cum[k + 1] - self._cum[k]
        return float(np.mod((self._cum[k] + u[k] * seg) / self.length, 1.0))

    def arc(self, a: float, b: float) -> "CurveArc":
        return CurveArc(self, float(np.mod(a, 1.0)), float(np.mod(b, 1.0)))

    def full_arc(self, start: float = 0.0) -> "CurveArc":
        return CurveArc(self, float(np.mod(start, 1.0)), float(np.mod(start, 1.0)), full=True)

    @property
    def polygon(self) -> Polygon:
        return Polygon(to_xy(self._z))

    @property
    def ring(self) -> LinearRing:
        return LinearRing(to_xy(self._z))

    def distance(self, p: Any) -> float:
        return float(self.ring.distance(ShapelyPoint(as_point(p).real, as_point(p).imag)))

    def refined(self) -> "OrientedClosedCurve":
        """Same curve with a midpoint inserted on every edge."""
        mid = (self._z + np.roll(self._z, -1)) / 2
        both = np.empty(2 * self._z.size, dtype=complex)
        both[0::2], both[1::2] = self._z, mid
        return OrientedClosedCurve(both)

    def sample(self, spacing: float) -> Tuple[np.ndarray, np.ndarray]:
        """Parameters and points at roughly uniform spacing, vertices included."""
        n = max(8, int(math.ceil(self.length / spacing)))
        t = np.union1d(np.arange(n) / n, self.vertex_params)
        return t, self.points(t)

    def __repr__(self) -> str:
        return f"OrientedClosedCurve(n={self._z.size}, length={self.length:.4g})"


def contains(curve: OrientedClosedCurve, p: Any, tol: Optional[float] = None) -> bool:
    """Membership of p in the bounded complementary component (even-odd rule)."""
    tol = settings.tolerance if tol is None else tol
    p = as_point(p)
    if curve.distance(p) <= tol:
        raise OnCurve(f"{p} lies on the curve")
    a = curve.vertices
    b = np.roll(a, -1)
    straddle = (a.imag > p.imag) != (b.imag > p.imag)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = a.real + (p.imag - a.imag) * (b.real - a.real) / (b.imag - a.imag)
    hits = straddle & (x_cross > p.real)
    return bool(np.count_nonzero(hits) % 2 == 1)


@dataclass(frozen=True)
class CurveArc:
    """Counterclockwise subarc [a, b] of an oriented closed curve."""

    parent: OrientedClosedCurve
    a: float
    b: float
    full: bool = False

    def __post_init__(self):
        if not self.full and abs(self.a - self.b) <= 1e-15:
            raise ValueError("an arc needs distinct endpoints unless it is the full curve")

    @property
    def span(self) -> float:
        if self.full:
            return 1.0
        return float(np.mod(self.b - self.a, 1.0))

    def param(self, s: Any) -> Any:
        return np.mod(self.a + np.asarray(s, dtype=float) * self.span, 1.0)

    def at(self, s: Any) -> Any:
        return self.parent.points(self.param(s))

    @property
    def start(self) -> complex:
        return self.parent.points(self.a)

    @property
    def end(self) -> complex:
        return self.parent.points(self.a + self.span)

    @property
    def breakpoints(self) -> np.ndarray:
        """Local parameters of the parent vertices strictly inside the arc."""
        local = np.mod(self.parent.vertex_params - self.a, 1.0) / self.span
        return np.sort(local[(local > 1e-12) & (local < 1 - 1e-12)])

    def polyline(self) -> np.ndarray:
        s = np.concatenate([[0.0], self.breakpoints, [1.0]])
        return np.asarray(self.at(s), dtype=complex)

    def complement(self) -> "CurveArc":
        return CurveArc(self.parent, self.b, self.a)

    def contains_param(self, t: float) -> bool:
        return self.full or float(np.mod(t - self.a, 1.0)) <= self.span


class PolylinePath:
    """Open polyline parameterized by normalized arc length s in [0, 1]."""

    def __init__(self, vertices: Iterable[Any]):
        z = as_points(list(vertices))
        keep = np.ones(z.size, dtype=bool)
        keep[1:] = np.abs(np.diff(z)) > settings.tolerance
        z = z[keep]
        if z.size < 2:
            raise NotSimple("a path needs two distinct vertices")
        self._z = z
        self._cum = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(z)))])
        self.length = float(self._cum[-1])

    @property
    def vertices(self) -> np.ndarray:
        return self._z.copy()

    @property
    def start(self) -> complex:
        return complex(self._z[0])

    @property
    def end(self) -> complex:
        return complex(self._z[-1])

    def at(self, s: Any) -> Any:
        t = np.clip(np.asarray(s, dtype=float), 0.0, 1.0) * self.length
        out = np.interp(t, self._cum, self._z.real) + 1j * np.interp(t, self._cum, self._z.imag)
        if np.ndim(out) == 0:
            return complex(out)
        return out

    @property
    def breakpoints(self) -> np.ndarray:
        return self._cum[1:-1] / self.length

    def polyline(self) -> np.ndarray:
        return self._z.copy()

    def reversed(self) -> "PolylinePath":
        return PolylinePath(self._z[::-1])

    @property
    def line(self) -> LineString:
        return LineString(to_xy(self._z))


Traversable = Union[CurveArc, PolylinePath]


# Rasterized regions

@dataclass
class Region:
    """Occupancy grid over a window; mask[row, col] with rows along y."""

    window: Window
    resolution: float
    mask: np.ndarray
    geometry: Optional[BaseGeometry] = None
    hull_geometry: Optional[BaseGeometry] = field(default=None, repr=False)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.mask.shape

    @property
    def cell_size(self) -> Tuple[float, float]:
        ny, nx = self.mask.shape
        return self.window.width / nx, self.window.height / ny

    @property
    def cell(self) -> float:
        return max(self.cell_size)

    def cell_of(self, z: Any) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        cw, ch = self.cell_size
        ny, nx = self.mask.shape
        col = np.floor((z.real - self.window.xmin) / cw).astype(int)
        row = np.floor((z.imag - self.window.ymin) / ch).astype(int)
        inside = (col >= 0) & (col < nx) & (row >= 0) & (row < ny)
        return np.clip(row, 0, ny - 1), np.clip(col, 0, nx - 1), inside

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        cw, ch = self.cell_size
        ny, nx = self.mask.shape
        xs = self.window.xmin + (np.arange(nx) + 0.5) * cw
        ys = self.window.ymin + (np.arange(ny) + 0.5) * ch
        return np.meshgrid(xs, ys)

    def cell_center(self, row: Any, col: Any) -> Any:
        cw, ch = self.cell_size
        return (self.window.xmin + (np.asarray(col) + 0.5) * cw
                + 1j * (self.window.ymin + (np.asarray(row) + 0.5) * ch))

    def marks(self, z: Any) -> np.ndarray:
        row, col, inside = self.cell_of(z)
        return inside & self.mask[row, col]

    def near(self, z: Any, cells: int = 1) -> np.ndarray:
        grown = ndimage.binary_dilation(self.mask, iterations=cells) if cells > 0 else self.mask
        row, col, inside = self.cell_of(z)
        return inside & grown[row, col]

    @property
    def area(self) -> float:
        cw, ch = self.cell_size
        return float(np.count_nonzero(self.mask)) * cw * ch

    def boundary_cells(self) -> np.ndarray:
        return self.mask & ~ndimage.binary_erosion(self.mask, border_value=0)

    def with_mask(self, mask: np.ndarray) -> "Region":
        return Region(self.window, self.resolution, mask, self.geometry, self.hull_geometry)


def grid_shape(window: Window, resolution: float) -> Tuple[int, int]:
    if not resolution > 0:
        raise BadResolution(f"resolution must be positive, got {resolution}")
    nx = max(1, int(math.ceil(window.width * resolution - 1e-9)))
    ny = max(1, int(math.ceil(window.height * resolution - 1e-9)))
    return ny, nx


def burn(mask: np.ndarray, window: Window, z: np.ndarray) -> None:
    """Mark the cells containing the given points (in place)."""
    ny, nx = mask.shape
    z = np.asarray(z, dtype=complex).ravel()
    if z.size == 0:
        return
    col = np.floor((z.real - window.xmin) / (window.width / nx)).astype(int)
    row = np.floor((z.imag - window.ymin) / (window.height / ny)).astype(int)
    ok = (col >= 0) & (col < nx) & (row >= 0) & (row < ny)
    mask[row[ok], col[ok]] = True


def burn_polyline(mask: np.ndarray, window: Window, z: np.ndarray) -> None:
    ny, nx = mask.shape
    step = 0.5 * min(window.width / nx, window.height / ny)
    z = np.asarray(z, dtype=complex)
    if z.size == 1:
        burn(mask, window, z)
        return
    pts = [z[:1]]
    for p, q in zip(z[:-1], z[1:]):
        n = max(1, int(math.ceil(abs(q - p) / step)))
        pts.append(p + (q - p) * np.arange(1, n + 1) / n)
    burn(mask, window, np.concatenate(pts))


def _as_geometry(inputs: Any) -> BaseGeometry:
    if isinstance(inputs, BaseGeometry):
        return inputs
    if isinstance(inputs, Region):
        return inputs.geometry
    if isinstance(inputs, OrientedClosedCurve):
        return inputs.polygon
    return unary_union([_as_geometry(g) for g in inputs])


def rasterize(geometry: BaseGeometry, window: Window, resolution: float) -> np.ndarray:
    """Cells meeting the geometry: polygon cells by center test, plus every
    cell crossed by a boundary, line or point."""
    ny, nx = grid_shape(window, resolution)
    mask = np.zeros((ny, nx), dtype=bool)
    step = 0.5 * min(window.width / nx, window.height / ny)
    for part in shapely.get_parts(geometry):
        if part.is_empty:
            continue
        if part.geom_type == "Polygon":
            minx, miny, maxx, maxy = part.bounds
            c0 = max(0, int((minx - window.xmin) / window.width * nx) - 1)
            c1 = min(nx, int((maxx - window.xmin) / window.width * nx) + 2)
            r0 = max(0, int((miny - window.ymin) / window.height * ny) - 1)
            r1 = min(ny, int((maxy - window.ymin) / window.height * ny) + 2)
            if c1 > c0 and r1 > r0:
                xs = window.xmin + (np.arange(c0, c1) + 0.5) * window.width / nx
                ys = window.ymin + (np.arange(r0, r1) + 0.5) * window.height / ny
                gx, gy = np.meshgrid(xs, ys)
                mask[r0:r1, c0:c1] |= shapely.contains_xy(part, gx, gy)
            edges = shapely.segmentize(part.boundary, step)
        elif part.geom_type == "Point":
            edges = part
        else:
            edges = shapely.segmentize(part, step)
        xy = shapely.get_coordinates(edges)
        burn(mask, window, xy[:, 0] + 1j * xy[:, 1])
    return mask


def region_of(geometry: Any, window: Window, resolution: Optional[float] = None) -> Region:
    """Rasterize a compactum without filling its holes."""
    resolution = settings.resolution if resolution is None else resolution
    geom = _as_geometry(geometry)
    return Region(window, resolution, rasterize(geom, window, resolution), geometry=geom)


def vector_hull(geometry: BaseGeometry) -> BaseGeometry:
    """Geometry together with every bounded face its linework encloses."""
    linework = []
    for part in shapely.get_parts(geometry):
        if part.geom_type == "Polygon":
            linework.append(part.boundary)
        elif part.geom_type in ("LineString", "LinearRing", "MultiLineString"):
            linework.append(part)
    if not linework:
        return geometry
    faces = list(polygonize(unary_union(linework)))
    return unary_union([geometry] + faces)


def topological_hull(inputs: Any, window: Window, resolution: Optional[float] = None) -> Region:
    """Compactum plus its bounded complementary components, on a grid."""
    resolution = settings.resolution if resolution is None else resolution
    if not resolution > 0:
        raise BadResolution(f"resolution must be positive, got {resolution}")
    geom = _as_geometry(inputs)
    if geom.is_empty:
        raise OutsideWindow("empty generating set")
    minx, miny, maxx, maxy = geom.bounds
    if not (minx > window.xmin and miny > window.ymin and maxx < window.xmax and maxy < window.ymax):
        raise OutsideWindow(f"generating set {geom.bounds} is not strictly inside {window.to_json()}")
    if isinstance(inputs, Region) and inputs.window == window and inputs.resolution == resolution:
        raw = inputs.mask
    else:
        raw = rasterize(geom, window, resolution)
    filled = ndimage.binary_fill_holes(raw)
    return Region(window, resolution, filled, geometry=geom, hull_geometry=vector_hull(geom))


def hull_region(region: Region) -> Region:
    """Fill the holes of an existing region in place of recomputing it."""
    filled = ndimage.binary_fill_holes(region.mask)
    hull_geom = vector_hull(region.geometry) if region.geometry is not None else None
    return Region(region.window, region.resolution, filled, region.geometry, hull_geom)


# Crosscuts and shadows

@dataclass
class Crosscut:
    """Open arc of the complement whose closure meets the compactum at its endpoints."""

    path: np.ndarray
    a: complex
    b: complex
    shadow: Region
    arc: Optional[CurveArc] = None

    @property
    def shadow_area(self) -> float:
        return self.shadow.area


def _runs(flags: np.ndarray) -> List[Tuple[int, int]]:
    """Maximal cyclic runs of True, as (first, last) indices; flags[0] must be False."""
    runs = []
    n = flags.size
    k = 0
    while k < n:
        if flags[k]:
            j = k
            while j + 1 < n and flags[j + 1]:
                j += 1
            runs.append((k, j))
            k = j + 1
        else:
            k += 1
    return runs


def crosscut_components(curve: OrientedClosedCurve, X: Region) -> List[Crosscut]:
    """Maximal open subarcs of the curve off X, each with its shadow."""
    t, z = curve.sample(X.cell / 4)
    on = X.marks(z)
    if not np.any(on):
        raise NoContact("curve does not meet the compactum")
    rows, cols, _ = X.cell_of(z[on])
    contact_cells = len(set(zip(rows.tolist(), cols.tolist())))
    if contact_cells < 2:
        logger.warning("Degenerate contact with compactum", contact_cells=contact_cells)
        return []
    if np.all(on):
        return []

    shift = int(np.argmax(on))
    t = np.roll(t, -shift)
    z = np.roll(z, -shift)
    off = ~np.roll(on, -shift)
    hull_mask = ndimage.binary_fill_holes(X.mask)
    result: List[Crosscut] = []
    for first, last in _runs(off):
        t0 = t[first - 1]
        t1 = t[(last + 1) % t.size]
        arc = curve.arc(t0, t1)
        path = arc.polyline()
        q_mask = np.zeros_like(X.mask)
        burn_polyline(q_mask, X.window, path)
        filled = ndimage.binary_fill_holes(hull_mask | q_mask)
        shadow = filled & ~hull_mask & ~q_mask
        result.append(Crosscut(path=path, a=complex(path[0]), b=complex(path[-1]),
                               shadow=X.with_mask(shadow), arc=arc))
    logger.debug("Crosscuts found", count=len(result), contact_cells=contact_cells)
    return result


def extend_path(path: np.ndarray, amount: float) -> np.ndarray:
    """Push both ends of a polyline outward along their end tangents."""
    z = np.asarray(path, dtype=complex).copy()
    d0 = z[0] - z[1]
    d1 = z[-1] - z[-2]
    z[0] = z[0] + d0 / abs(d0) * amount
    z[-1] = z[-1] + d1 / abs(d1) * amount
    return z


def shadow_of(hull: BaseGeometry, path: np.ndarray, extend: float = 1e-6) -> BaseGeometry:
    """Bounded region cut off from infinity by the hull and a crosscut path."""
    line = LineString(to_xy(extend_path(path, extend)))
    combined = vector_hull(unary_union([hull, line]))
    rest = combined.difference(hull)
    trace = LineString(to_xy(path))
    parts = [p for p in shapely.get_parts(rest)
             if p.geom_type == "Polygon" and p.area > extend ** 2 and p.distance(trace) <= 10 * extend]
    if not parts:
        return Polygon()
    return unary_union(parts)


def crosscut_hull(hull: BaseGeometry, path: np.ndarray, extend: float = 1e-6) -> BaseGeometry:
    """Topological hull of the compactum together with a crosscut."""
    line = LineString(to_xy(extend_path(path, extend)))
    return unary_union([hull, line, shadow_of(hull, path, extend)])


# Bumping curves

@dataclass
class BumpingCurve:
    curve: OrientedClosedCurve
    contact_params: np.ndarray
    contacts: np.ndarray
    stride: int

    @property
    def partition(self) -> np.ndarray:
        return self.contact_params


def hull_points(hull: BaseGeometry, spacing: float) -> np.ndarray:
    """Boundary samples plus interior grid points of a hull geometry."""
    xy = shapely.get_coordinates(shapely.segmentize(hull.boundary if hull.area > 0 else hull, spacing))
    pts = [xy[:, 0] + 1j * xy[:, 1]]
    if hull.area > 0:
        minx, miny, maxx, maxy = hull.bounds
        gx, gy = np.meshgrid(np.arange(minx, maxx + spacing, spacing),
                             np.arange(miny, maxy + spacing, spacing))
        inside = shapely.contains_xy(hull, gx, gy)
        pts.append(gx[inside] + 1j * gy[inside])
    return np.concatenate(pts)


def _polyline_gap(a: np.ndarray, b: np.ndarray) -> float:
    la = LineString(to_xy(a)) if a.size > 1 else ShapelyPoint(a[0].real, a[0].imag)
    lb = LineString(to_xy(b)) if b.size > 1 else ShapelyPoint(b[0].real, b[0].imag)
    return float(la.distance(lb))


def densify(z: np.ndarray, spacing: float) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    pts = [z[:1]]
    for p, q in zip(z[:-1], z[1:]):
        n = max(1, int(math.ceil(abs(q - p) / spacing)))
        pts.append(p + (q - p) * np.arange(1, n + 1) / n)
    return np.concatenate(pts)


def bumping_curve(X: Any, f: Callable[[np.ndarray], np.ndarray], mesh: float,
                  tol: Optional[float] = None) -> BumpingCurve:
    """Simple closed curve hugging T(X) at distance mesh, touching X at
    marked contact points, each arc between contacts disjoint from its image."""
    tol = settings.tolerance if tol is None else tol
    geom = _as_geometry(X)
    hull = vector_hull(geom)

    pts = hull_points(hull, mesh / 4)
    moved = np.abs(f(pts) - pts)
    k = int(np.argmin(moved))
    if moved[k] < 10 * tol:
        raise FixedPointNearX(f"|f(z) - z| = {moved[k]:.3e} at {complex(pts[k])}")

    grown = hull.buffer(mesh, quad_segs=16)
    if grown.geom_type != "Polygon":
        raise MeshTooCoarse("compactum is not connected at this mesh")
    ring = orient_polygon(Polygon(grown.exterior), 1.0).exterior
    xy = np.asarray(shapely.segmentize(ring, mesh / 2).coords)[:-1]
    verts = xy[:, 0] + 1j * xy[:, 1]
    n = verts.size

    for stride in (8, 6, 4, 3, 2):
        new = verts.copy()
        picked: List[int] = []
        for k in range(0, n - stride // 2, stride):
            q_geom = nearest_points(geom, ShapelyPoint(verts[k].real, verts[k].imag))[0]
            q = complex(q_geom.x, q_geom.y)
            if any(abs(q - new[j]) <= mesh / 4 for j in picked):
                continue
            new[k] = q
            picked.append(k)
        if len(picked) < 2:
            continue
        try:
            curve = OrientedClosedCurve(new)
        except (NotSimple, NotCounterclockwise):
            logger.debug("Bumping candidate rejected", stride=stride, reason="not simple")
            continue
        if not curve.polygon.buffer(10 * tol).covers(hull):
            logger.debug("Bumping candidate rejected", stride=stride, reason="hull not covered")
            continue
        params = curve.vertex_params[picked]
        order = np.argsort(params)
        params = params[order]
        ok = True
        for i in range(params.size):
            arc = curve.arc(params[i], params[(i + 1) % params.size])
            path = densify(arc.polyline(), mesh / 8)
            if _polyline_gap(path, f(path)) <= 10 * tol:
                ok = False
                break
        if not ok:
            logger.debug("Bumping candidate rejected", stride=stride, reason="arc meets image")
            continue
        logger.info("Bumping curve built", vertices=len(curve), contacts=int(params.size), stride=stride)
        return BumpingCurve(curve, params, curve.points(params), stride)
    raise MeshTooCoarse(f"no bumping curve at mesh {mesh} separates every arc from its image")


# Named continua

def horseshoe_vertices(inner: float = 1.0, outer: float = 2.0, degrees: int = 300, step: int = 1) -> np.ndarray:
    """Annular sector from angle 0 to ``degrees``: outer arc counterclockwise,
    then the inner arc back."""
    ang = np.deg2rad(np.arange(0, degrees + step, step, dtype=float))
    return np.concatenate([outer * np.exp(1j * ang), inner * np.exp(1j * ang[::-1])])


FJORD_VERTICES = [(-1, -1), (1, -1), (1, 1), (0.1, 1), (0.1, -0.5), (-0.1, -0.5), (-0.1, 1), (-1, 1)]


def named_continuum(name: str) -> BaseGeometry:
    """Compacta used by scenes and tests."""
    if name == "unit-square":
        return Polygon([(-1, -1), (1, -1), (1, 1), (-1, 1)])
    if name == "segment":
        return LineString([(-1, 0), (1, 0)])
    if name == "two-points":
        return MultiPoint([(-1, 0), (1, 0)])
    if name == "horseshoe":
        return Polygon(to_xy(horseshoe_vertices()))
    if name == "fjord":
        return Polygon(FJORD_VERTICES)
    raise ValueError(f"unknown named continuum {name!r}")
