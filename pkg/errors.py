"""Exception hierarchy for the plane topology toolkit."""

from typing import Optional


class PlaneTopologyError(Exception):
    """Base class for every error raised by the toolkit."""


# geom

class EmptyInput(PlaneTopologyError):
    """An operation received an empty point set."""


class PoleInput(PlaneTopologyError):
    """Inversion was asked to map its own pole."""


class DegenerateChord(PlaneTopologyError):
    """A chord was requested between coincident endpoints."""


class NotOnBoundary(PlaneTopologyError):
    """A point expected on a ball boundary lies off it."""


# curve

class NotCounterclockwise(PlaneTopologyError):
    """A closed curve was given with non-positive signed area."""


class NotSimple(PlaneTopologyError):
    """A polyline crosses itself."""


class OnCurve(PlaneTopologyError):
    """A membership query landed on the curve itself."""


class BadResolution(PlaneTopologyError):
    """Raster resolution must be positive."""


class OutsideWindow(PlaneTopologyError):
    """A point or generating set is not inside the working window."""


class NoContact(PlaneTopologyError):
    """A curve does not meet the compactum."""


class FixedPointNearX(PlaneTopologyError):
    """The map moves some point of the hull by less than the tolerance."""


class MeshTooCoarse(PlaneTopologyError):
    """No bumping curve at this mesh satisfies the separation checks."""


# winding

class FixedPointOnCurve(PlaneTopologyError):
    """The displacement vanishes (numerically) somewhere on the curve."""

    def __init__(self, message: str, point: Optional[complex] = None, distance: Optional[float] = None):
        super().__init__(message)
        self.point = point
        self.distance = distance


class CertificationFailed(PlaneTopologyError):
    """Argument lifting did not settle within the refinement limit."""


class OnPath(PlaneTopologyError):
    """Winding number asked about a point of the path."""


# variation

class NoEscape(PlaneTopologyError):
    """No junction from this vertex reaches the window boundary."""


class EndpointOnJunction(PlaneTopologyError):
    """The image of an arc endpoint lies on the junction."""


class UnresolvedTangency(PlaneTopologyError):
    """Image path stays tangent to the junction after every retry."""


class ArcImageOverlap(PlaneTopologyError):
    """An arc meets its own image."""


class InvalidPartition(PlaneTopologyError):
    """A partition violates the variation hypotheses on one arc."""

    def __init__(self, condition: str, arc_index: int, detail: str = ""):
        message = f"{condition} on arc {arc_index}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
        self.condition = condition
        self.arc_index = arc_index


class NoValidPartition(PlaneTopologyError):
    """No partition of the curve satisfies the variation hypotheses."""


# kp

class DisconnectedComplement(PlaneTopologyError):
    """The compactum separates the plane."""


class NoChord(PlaneTopologyError):
    """No partition element realizes a chord between the given points."""


class ChordImageOverlap(PlaneTopologyError):
    """A chord meets its own image."""


# maps

class ValueHit(PlaneTopologyError):
    """f takes the value f(p) on the curve."""


class NotInHull(PlaneTopologyError):
    """The query point lies outside the topological hull of the curve."""


class InvalidLipschitzBound(PlaneTopologyError):
    """A declared Lipschitz bound is violated on sampled pairs."""


class MapSyntaxError(PlaneTopologyError):
    """A map expression failed to parse."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


# checkers

class HypothesisViolation(PlaneTopologyError):
    """A theorem check was run on an instance violating its hypotheses."""

    def __init__(self, clause: str, detail: str = ""):
        super().__init__(f"{clause}: {detail}" if detail else clause)
        self.clause = clause


class BoundaryFixedPoint(PlaneTopologyError):
    """Every jittered cut of a box passes through a fixed point."""


# shell

class SceneParseError(PlaneTopologyError):
    """A scene file is malformed."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column
