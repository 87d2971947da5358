"""Data models for scenes, task reports and cache entries."""

from datetime import datetime
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

XY = List[float]


def xy(z: complex) -> XY:
    """JSON form of a point."""
    return [float(complex(z).real), float(complex(z).imag)]


# Scene input

class ContinuumSpec(BaseModel):
    """Compactum given by vertices or by a built-in name."""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["polygon", "polyline", "points", "named"] = Field(description="How the compactum is given")
    vertices: List[XY] = Field(default_factory=list, description="Vertex coordinates [x, y]")
    name: Optional[str] = Field(default=None, description="Built-in compactum name for kind 'named'")

    @model_validator(mode="after")
    def _check_shape(self) -> "ContinuumSpec":
        if self.kind == "named" and not self.name:
            raise ValueError("named continuum needs a name")
        if self.kind != "named" and not self.vertices:
            raise ValueError(f"{self.kind} continuum needs vertices")
        for v in self.vertices:
            if len(v) != 2:
                raise ValueError("vertices are [x, y] pairs")
        return self


class LollipopSpec(BaseModel):
    """Stick I inside T(S), with its endpoints on S."""
    model_config = ConfigDict(extra="forbid")

    stick: List[XY] = Field(description="Polyline from a_0 to a_{n+1}")
    partition: Optional[List[float]] = Field(default=None, description="Curve parameters a_0 < ... < a_{n+1}")


class Scene(BaseModel):
    """Scene file contents."""
    model_config = ConfigDict(extra="forbid")

    continuum: ContinuumSpec = Field(description="The compactum X or K")
    map: Optional[str] = Field(default=None, description="Map expression")
    lipschitz: Optional[float] = Field(default=None, description="Declared Lipschitz bound of the map")
    window: Optional[List[float]] = Field(default=None, description="[xmin, ymin, xmax, ymax]")
    resolution: Optional[int] = Field(default=None, description="Raster divisions across the window")
    delta: float = Field(default=0.25, description="Chord diameter bound for classification")
    eta: float = Field(default=0.0, description="Minimum chord diameter for the outchannel scan")
    tasks: List[str] = Field(default_factory=list, description="Tasks to run, in order")
    seed: Optional[int] = Field(default=None, description="Random seed")
    tolerance: Optional[float] = Field(default=None, description="Geometric tolerance")
    curve: Optional[List[XY]] = Field(default=None, description="Counterclockwise simple closed curve S")
    partition: Optional[List[float]] = Field(default=None, description="Partition parameters on S")
    lollipop: Optional[LollipopSpec] = Field(default=None, description="Lollipop stick and partition")
    mesh: Optional[float] = Field(default=None, description="Bumping curve mesh")
    trials: int = Field(default=50, description="Orientation classification trials")
    box: Optional[List[float]] = Field(default=None, description="Fixed point search box")

    @field_validator("window", "box")
    @classmethod
    def _four_numbers(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        if v is not None and (len(v) != 4 or v[0] >= v[2] or v[1] >= v[3]):
            raise ValueError("expected [xmin, ymin, xmax, ymax] with xmin < xmax and ymin < ymax")
        return v

    @field_validator("tasks")
    @classmethod
    def _known_tasks(cls, v: List[str]) -> List[str]:
        unknown = [t for t in v if t not in TASK_ORDER]
        if unknown:
            raise ValueError(f"unknown tasks {unknown}")
        return v


TASK_ORDER = ["kp", "classify", "index", "variation", "ivp1", "lollipop", "fixpoint", "orientation",
              "outchannel-scan"]


# Reports

class JunctionSummary(BaseModel):
    """Junction used for one arc."""
    vertex: XY = Field(description="Junction vertex")
    method: str = Field(description="Construction method (wedge, radial, raster)")
    rotation: float = Field(default=0.0, description="Perturbation angle applied to the rays")


class VariationReport(BaseModel):
    """Variation of a map on each arc of a partition."""
    per_arc: List[int] = Field(description="Variation of each arc A_i")
    total: int = Field(description="Sum of the per-arc variations")
    partition: List[float] = Field(description="Curve parameters a_0 < ... < a_n")
    junctions: List[JunctionSummary] = Field(default_factory=list, description="Junction used per arc")
    events: List[List[str]] = Field(default_factory=list, description="Crossing labels per arc")
    retries: List[int] = Field(default_factory=list, description="Junction perturbation retries per arc")

    @model_validator(mode="after")
    def _total_is_sum(self) -> "VariationReport":
        if self.total != sum(self.per_arc):
            raise ValueError(f"total {self.total} differs from sum of per-arc values {sum(self.per_arc)}")
        return self


class IndexVariationReport(BaseModel):
    """Both sides of ind = var + 1."""
    index: int = Field(description="ind(f, S)")
    variation: int = Field(description="var(f, S)")
    equal: bool = Field(description="Whether ind equals var + 1")
    variation_report: VariationReport = Field(description="Per-arc detail")


class LollipopReport(BaseModel):
    """Lollipop identity for a stick I and partition of S."""
    side: Literal["R", "L"] = Field(description="Component of T(S) minus I holding f(a_{n+1})")
    variation_sum: int = Field(description="Sum of var(f, A_i, S) over the counted arcs")
    lhs: int = Field(description="Left-hand side of the identity")
    rhs: int = Field(description="Index of f on the loop through I")
    identity_holds: bool = Field(description="lhs == rhs")
    per_arc: List[int] = Field(description="var(f, A_i, S) for i = 0..n")
    index: int = Field(description="ind(f, S)")
    negative_arcs: List[int] = Field(default_factory=list, description="Arcs with negative variation")
    corollary_holds: Optional[bool] = Field(default=None, description="Negative arc found when ind(f, S) = 0")


class HullIndexReport(BaseModel):
    """Index of a map sending S into T(S)."""
    index: int = Field(description="ind(f, S)")
    passed: bool = Field(description="index == 1")


class HomotopyReport(BaseModel):
    """Index along a linear homotopy."""
    levels: List[float] = Field(description="Homotopy parameters")
    indices: List[int] = Field(description="Index at each level")
    constant: bool = Field(description="All indices agree")


class InvarianceReport(BaseModel):
    """Variation under independently built junctions or completing curves."""
    label: str = Field(description="Which invariance was tested")
    values: List[int] = Field(description="Variation per trial")
    agree: bool = Field(description="All values equal")


class FixedPointReport(BaseModel):
    """Fixed points located by boundary index subdivision."""
    status: Literal["found", "absent"] = Field(description="'absent' carries no nonexistence claim")
    box: List[float] = Field(description="Search box")
    boundary_index: Optional[int] = Field(default=None, description="Index of f on the box boundary, absent when a fixed point sits on it")
    points: List[XY] = Field(default_factory=list, description="Located fixed points")
    residuals: List[float] = Field(default_factory=list, description="|f(x) - x| per point")
    leaves: int = Field(default=0, description="Nonzero-index leaves refined")
    iterate: int = Field(default=1, description="1 for f, 2 for f∘f")


class OrientationTrial(BaseModel):
    """One sampled curve and an interior point."""
    shape: str = Field(description="circle or polygon")
    center: XY = Field(description="Curve center")
    radius: float = Field(description="Curve radius")
    point: XY = Field(description="Interior point p")
    degree: Optional[int] = Field(default=None, description="degree(f_p), absent when skipped")
    skipped: Optional[str] = Field(default=None, description="Reason the trial was inconclusive")


class OrientationProfile(BaseModel):
    """Sign profile of sampled degrees."""
    classification: Literal["positive", "negative", "mixed", "inconclusive"] = Field(
        description="Sampled orientation evidence")
    positive: int = Field(description="Trials with positive degree")
    negative: int = Field(description="Trials with negative degree")
    zero: int = Field(description="Trials with zero degree")
    inconclusive: int = Field(description="Skipped trials")
    trials: List[OrientationTrial] = Field(default_factory=list, description="Per-trial detail")


class PartitionSummary(BaseModel):
    """Counts over a KP partition."""
    elements: int = Field(description="Number of partition elements")
    with_interior: int = Field(description="Elements whose hull has nonempty interior")
    by_kind: Dict[str, int] = Field(description="Element counts by ball kind")
    gaps: int = Field(description="Elements with three or more contacts")
    chords: int = Field(description="Number of hull chords")
    spacing: float = Field(description="Boundary sample spacing h")


class ChordClassification(BaseModel):
    """Variation sign of one small chord."""
    chord_id: int = Field(description="Index in the partition chord list")
    endpoints: List[XY] = Field(description="Chord endpoints on K")
    diameter: float = Field(description="Euclidean diameter")
    variation: Optional[int] = Field(default=None, description="var(f, C, K), absent when excluded")
    sign: Literal["+", "-", "0", "excluded"] = Field(description="Sign class")


class OutchannelChain(BaseModel):
    """Nested chord chain of one nonzero sign."""
    sign: Literal["+", "-"] = Field(description="Common variation sign")
    chords: List[int] = Field(description="Chord ids from outer to inner")
    diameters: List[float] = Field(description="Chord diameters, non-increasing")
    heuristic: bool = Field(default=True, description="Finite-resolution evidence, not a proof")


class TaskError(BaseModel):
    type: str
    message: str
    detail: Dict[str, Any] = Field(default_factory=dict)


class TaskResult(BaseModel):
    """Outcome of one scene task."""
    task: str = Field(description="Task name")
    status: Literal["passed", "failed", "inapplicable"] = Field(description="Task status")
    data: Dict[str, Any] = Field(default_factory=dict, description="Task payload")
    error: Optional[TaskError] = Field(default=None, description="Error for failed or inapplicable tasks")


class Report(BaseModel):
    """Full run report."""
    tool: str = Field(description="Tool name")
    version: str = Field(description="Tool version")
    input_hash: str = Field(description="sha256 of the scene file bytes")
    seed: int = Field(description="Seed used")
    passed: bool = Field(description="Every task passed or was inapplicable")
    tasks: List[TaskResult] = Field(default_factory=list, description="Per-task results")


class CacheEntry(BaseModel):
    """Cache entry model."""
    key: str = Field(description="Cache key")
    data: Any = Field(description="Cached data")
    expires_at: datetime = Field(description="Expiration timestamp")
    created_at: datetime = Field(default_factory=datetime.now, description="Creation timestamp")
