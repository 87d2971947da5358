"""Argument lifting: winding numbers, fixed-point index and fractional index."""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import structlog
from scipy.optimize import minimize_scalar

from config.settings import settings
from curve import CurveArc, OrientedClosedCurve
from errors import CertificationFailed, FixedPointOnCurve, OnPath

logger = structlog.get_logger()

Field = Callable[[np.ndarray], np.ndarray]


@dataclass
class ArgumentLift:
    """Continuous lift of the direction of a vector field along [t0, t1].

    ``values`` are in turns (radians / 2π), starting from the principal
    argument of the first vector.
    """

    params: np.ndarray
    vectors: np.ndarray
    values: np.ndarray
    certified: bool
    min_norm: float
    min_param: float

    @property
    def total(self) -> float:
        return float(self.values[-1] - self.values[0])

    @property
    def max_step(self) -> float:
        steps = np.abs(np.angle(self.vectors[1:] / self.vectors[:-1]))
        return float(steps.max()) if steps.size else 0.0


def _default_zero_error(t: float, norm: float) -> Exception:
    return FixedPointOnCurve(f"displacement {norm:.3e} at parameter {t:.6f}", distance=norm)


def lift_field(field: Field, t0: float = 0.0, t1: float = 1.0,
               breakpoints: Optional[Sequence[float]] = None,
               threshold: Optional[float] = None,
               on_zero: Callable[[float, float], Exception] = _default_zero_error,
               lipschitz_rate: Optional[float] = None,
               max_angle: float = math.pi / 2,
               initial_samples: Optional[int] = None,
               max_depth: Optional[int] = None,
               max_chord: Optional[float] = None) -> ArgumentLift:
    """Lift the argument of ``field`` over [t0, t1] by adaptive bisection.

    An interval is split while the angle between its end vectors reaches
    ``max_angle``. With ``lipschitz_rate`` (a bound on |field(s) - field(t)|
    per unit parameter) an interval is also split until its end vectors are
    longer than the rate times its width, which pins the lift increment and
    marks the result certified. ``max_chord`` caps the distance between
    consecutive vectors.
    """
    threshold = settings.fixed_point_threshold if threshold is None else threshold
    max_depth = settings.max_bisection_depth if max_depth is None else max_depth
    n0 = settings.initial_samples if initial_samples is None else initial_samples

    t = np.linspace(t0, t1, n0 + 1)
    if breakpoints is not None and len(breakpoints):
        bp = np.asarray(breakpoints, dtype=float)
        t = np.union1d(t, bp[(bp > t0) & (bp < t1)])
    v = np.asarray(field(t), dtype=complex)

    depth = 0
    while True:
        norms = np.abs(v)
        if norms.min() < threshold:
            k = int(np.argmin(norms))
            raise on_zero(float(t[k]), float(norms[k]))
        steps = np.abs(np.angle(v[1:] / v[:-1]))
        flagged = steps >= max_angle
        if lipschitz_rate is not None:
            width = np.diff(t)
            shorter = np.minimum(norms[:-1], norms[1:])
            flagged |= lipschitz_rate * width >= shorter
        if max_chord is not None:
            flagged |= np.abs(np.diff(v)) > max_chord
        if not np.any(flagged):
            break
        if depth >= max_depth:
            k = int(np.argmax(flagged))
            raise CertificationFailed(
                f"argument lift unsettled after {depth} bisections near parameter {t[k]:.6f}")
        mids = 0.5 * (t[:-1][flagged] + t[1:][flagged])
        vm = np.asarray(field(mids), dtype=complex)
        order = np.argsort(np.concatenate([t, mids]), kind="mergesort")
        t = np.concatenate([t, mids])[order]
        v = np.concatenate([v, vm])[order]
        depth += 1

    # polish the smallest displacement between its neighbours
    norms = np.abs(v)
    k = int(np.argmin(norms))
    lo, hi = t[max(k - 1, 0)], t[min(k + 1, t.size - 1)]
    min_norm, min_param = float(norms[k]), float(t[k])
    if hi > lo:
        res = minimize_scalar(lambda s: float(np.abs(field(np.array([s]))[0])), bounds=(lo, hi),
                              method="bounded", options={"xatol": settings.refine_xatol})
        if res.success and res.fun < min_norm:
            min_norm, min_param = float(res.fun), float(res.x)
    if min_norm < threshold:
        raise on_zero(min_param, min_norm)

    increments = np.angle(v[1:] / v[:-1]) / (2 * math.pi)
    values = np.concatenate([[np.angle(v[0]) / (2 * math.pi)],
                             np.angle(v[0]) / (2 * math.pi) + np.cumsum(increments)])
    logger.debug("Argument lifted", samples=int(t.size), depth=depth, min_norm=min_norm,
                 certified=lipschitz_rate is not None)
    return ArgumentLift(params=t, vectors=v, values=values, certified=lipschitz_rate is not None,
                        min_norm=min_norm, min_param=min_param)


def _lipschitz(f) -> Optional[float]:
    return getattr(f, "lipschitz", None)


def _curve_zero_error(points: Callable[[float], complex]) -> Callable[[float, float], Exception]:
    def build(t: float, norm: float) -> Exception:
        p = complex(points(t))
        return FixedPointOnCurve(f"|f(z) - z| = {norm:.3e} at {p}", point=p, distance=norm)
    return build


def displacement_lift(f, S: OrientedClosedCurve, arc: Optional[CurveArc] = None) -> ArgumentLift:
    """Lift of the displacement f(z) - z along the curve or one of its arcs."""
    L = _lipschitz(f)
    if arc is None:
        arc = S.full_arc()

    def field(s: np.ndarray) -> np.ndarray:
        z = arc.at(s)
        return np.asarray(f(z), dtype=complex) - z

    rate = (L + 1.0) * S.length * arc.span if L is not None else None
    return lift_field(field, 0.0, 1.0, breakpoints=arc.breakpoints, lipschitz_rate=rate,
                      on_zero=_curve_zero_error(arc.at))


def index(f, S: OrientedClosedCurve) -> int:
    """Fixed-point index ind(f, S): net turns of f(z) - z once around S."""
    lift = displacement_lift(f, S)
    total = lift.total
    rounded = int(round(total))
    if abs(total - rounded) >= 1e-6:
        raise CertificationFailed(f"index {total:.9f} is not an integer")
    logger.debug("Index computed", index=rounded, samples=int(lift.params.size),
                 certified=lift.certified)
    return rounded


def fractional_index(f, S: OrientedClosedCurve, A: CurveArc) -> float:
    """Net turns of f(z) - z along the counterclockwise arc A of S."""
    return displacement_lift(f, S, A).total


def winding_number(g: np.ndarray, w: complex, tol: Optional[float] = None) -> int:
    """Winding number of the closed polyline g about w."""
    tol = settings.tolerance if tol is None else tol
    z = np.asarray(g, dtype=complex)
    if z.size < 2:
        raise OnPath("polyline needs at least two vertices")
    if z[0] != z[-1]:
        z = np.append(z, z[0])
    a, b = z[:-1] - w, z[1:] - w
    d = b - a
    dd = np.abs(d) ** 2
    u = np.clip(np.real(np.conj(d) * (-a)) / np.where(dd > 0, dd, 1.0), 0.0, 1.0)
    gap = np.abs(a + u * d)
    if gap.min() <= tol:
        raise OnPath(f"{w} lies on the polyline")
    total = float(np.sum(np.angle(b / a))) / (2 * math.pi)
    return int(round(total))
