"""Command-line runner: reads a scene file, runs its tasks, writes a JSON
report and optional SVG figures."""

import argparse
import asyncio
import hashlib
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import structlog

# Configure structured logging
structlog.configure(
    processors=[
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.stdlib.PositionalArgumentsFormatter(),
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.UnicodeDecoder(),
        structlog.processors.JSONRenderer()
    ],
    context_class=dict,
    logger_factory=structlog.stdlib.LoggerFactory(),
    wrapper_class=structlog.stdlib.BoundLogger,
    cache_logger_on_first_use=True,
)

logger = structlog.get_logger()

import numpy as np
import shapely
from pydantic import ValidationError
from shapely.geometry import LineString, MultiPoint, Polygon
from shapely.geometry.base import BaseGeometry

from cache_manager import cache_manager
from checkers import check_index_variation, check_lollipop, locate_fixed_points
from config.settings import settings
from curve import OrientedClosedCurve, bumping_curve, named_continuum
from errors import HypothesisViolation, MapSyntaxError, NoValidPartition, PlaneTopologyError, SceneParseError
from geom import Window, as_points
from kp import KPPartition, classify_chords, maximal_balls, outchannel_scan
from maps import PlaneMap, orientation_class, parse_map
from models import TASK_ORDER, Report, Scene, TaskError, TaskResult
from svg_render import curve_figure, partition_figure, points_figure
from variation import auto_partition, variation_total
from winding import index

INAPPLICABLE = (HypothesisViolation, NoValidPartition)


def _line_of(text: str, needle: str) -> Optional[int]:
    for k, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return k
    return None


def load_scene(raw: bytes) -> Scene:
    """Parse scene bytes; every failure is a SceneParseError with a location."""
    text = raw.decode("utf-8", errors="replace")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneParseError(e.msg, e.lineno, e.colno) from e
    try:
        return Scene.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        key = str(first["loc"][0]) if first["loc"] else ""
        raise SceneParseError(f"{loc}: {first['msg']}", _line_of(text, f'"{key}"'), 1) from e


def build_continuum(scene: Scene) -> BaseGeometry:
    spec = scene.continuum
    if spec.kind == "named":
        try:
            return named_continuum(spec.name)
        except ValueError as e:
            raise SceneParseError(str(e)) from e
    if spec.kind == "polygon":
        geom = Polygon(spec.vertices)
        if not geom.is_valid:
            raise SceneParseError("continuum polygon is not simple")
        return geom
    if spec.kind == "polyline":
        return LineString(spec.vertices)
    return MultiPoint(spec.vertices)


class SceneRunner:
    """Runs the tasks of one scene in their fixed order."""

    def __init__(self, scene: Scene, text: str = "", out_dir: Optional[Path] = None, svg: bool = False):
        self.scene = scene
        self.out_dir = Path(out_dir or settings.output_dir)
        self.svg = svg
        self.continuum = build_continuum(scene)
        coords = shapely.get_coordinates(self.continuum)
        extent = coords[:, 0] + 1j * coords[:, 1]
        self.window = Window(*scene.window) if scene.window else Window.around(extent)
        if not self.window.strictly_contains(extent):
            raise SceneParseError("window does not contain the continuum", _line_of(text, '"window"'), 1)
        self.divisions = int(scene.resolution or settings.kp_boundary_divisions)
        self.map: Optional[PlaneMap] = None
        if scene.map:
            try:
                self.map = parse_map(scene.map, scene.lipschitz, self.window)
            except MapSyntaxError as e:
                raise SceneParseError(str(e), _line_of(text, '"map"'), e.column) from e
        self._partition: Optional[KPPartition] = None
        self._classification = None
        self._curve: Optional[OrientedClosedCurve] = None
        self._curve_partition: Optional[np.ndarray] = None
        self.figures: List[Path] = []

        self.tasks = {
            "kp": {"description": "Maximal-ball partition of the complement", "needs_map": False},
            "classify": {"description": "Variation sign of small chords", "needs_map": True},
            "index": {"description": "Fixed-point index on the scene curve", "needs_map": True},
            "variation": {"description": "Variation over the curve partition", "needs_map": True},
            "ivp1": {"description": "Index equals variation plus one", "needs_map": True},
            "lollipop": {"description": "Lollipop counting identity", "needs_map": True},
            "fixpoint": {"description": "Fixed point search in a box", "needs_map": True},
            "orientation": {"description": "Sampled orientation of the map", "needs_map": True},
            "outchannel-scan": {"description": "Nested chords of one nonzero sign", "needs_map": True},
        }

    @property
    def h(self) -> float:
        return self.window.width / self.divisions

    async def run(self) -> Tuple[List[TaskResult], Dict[str, float]]:
        results: List[TaskResult] = []
        timing: Dict[str, float] = {}
        for name in [t for t in TASK_ORDER if t in self.scene.tasks]:
            started = time.perf_counter()
            results.append(await self._run_task(name))
            timing[name] = time.perf_counter() - started
        return results, timing

    async def _run_task(self, name: str) -> TaskResult:
        if self.tasks[name]["needs_map"] and self.map is None:
            return TaskResult(task=name, status="inapplicable",
                              error=TaskError(type="MissingMap", message="scene has no map"))
        try:
            status, data = await self._execute_task(name)
            logger.info("Task finished", task=name, status=status)
            return TaskResult(task=name, status=status, data=data)
        except INAPPLICABLE as e:
            logger.warning("Task inapplicable", task=name, error=str(e))
            return TaskResult(task=name, status="inapplicable", data=self._partial(name),
                              error=self._error(e))
        except PlaneTopologyError as e:
            logger.error("Task failed", task=name, error=str(e))
            return TaskResult(task=name, status="failed", data=self._partial(name), error=self._error(e))

    def _error(self, e: Exception) -> TaskError:
        detail = {k: v for k, v in vars(e).items() if isinstance(v, (int, float, str)) and not k.startswith("_")}
        return TaskError(type=type(e).__name__, message=str(e), detail=detail)

    def _partial(self, name: str) -> Dict[str, Any]:
        if name == "ivp1" and self._curve is not None:
            try:
                return {"index": index(self.map, self._curve)}
            except PlaneTopologyError:
                return {}
        return {}

    async def _execute_task(self, name: str) -> Tuple[str, Dict[str, Any]]:
        """Execute a specific task."""
        if name == "kp":
            partition = await self._get_partition()
            data = {"summary": partition.summary().model_dump(),
                    "interior": [{"ball": e.ball.to_json(), "source": e.source,
                                  "chords": [c.to_json() for c in e.chords]}
                                 for e in partition.interior_elements()]}
            self._figure("kp", partition_figure(partition, self.window))
            return "passed", data

        elif name == "classify":
            classification = await self._get_classification()
            data = {"chords": [i.model_dump() for i in classification.items],
                    "plus": classification.plus, "minus": classification.minus,
                    "excluded": classification.excluded}
            signs = {i.chord_id: i.sign for i in classification.items}
            self._figure("classify", partition_figure(self._partition, self.window, signs))
            return "passed", data

        elif name == "index":
            S = await self._get_curve()
            ind = await asyncio.to_thread(index, self.map, S)
            return "passed", {"index": ind}

        elif name == "variation":
            S = await self._get_curve()
            partition = await self._get_curve_partition()
            report = await asyncio.to_thread(variation_total, self.map, S, partition, settings.seed)
            self._figure("variation", curve_figure(S, self.window, partition, compactum=self.continuum))
            return "passed", report.model_dump()

        elif name == "ivp1":
            S = await self._get_curve()
            partition = await self._get_curve_partition()
            report = await asyncio.to_thread(check_index_variation, self.map, S, partition, settings.seed)
            return ("passed" if report.equal else "failed"), report.model_dump()

        elif name == "lollipop":
            spec = self.scene.lollipop
            if spec is None:
                raise HypothesisViolation("stick", "scene has no lollipop stick")
            S = await self._get_curve()
            partition = spec.partition or self.scene.partition
            if partition is None:
                raise HypothesisViolation("partition", "lollipop needs an explicit partition")
            stick = as_points(spec.stick)
            report = await asyncio.to_thread(check_lollipop, self.map, S, partition, stick, settings.seed)
            ok = report.identity_holds and report.corollary_holds is not False
            return ("passed" if ok else "failed"), report.model_dump()

        elif name == "fixpoint":
            box = Window(*self.scene.box) if self.scene.box else self.window
            report = await asyncio.to_thread(locate_fixed_points, self.map, box)
            ok = all(r < 10 * max(settings.tolerance, 1e-9) for r in report.residuals)
            self._figure("fixpoint", points_figure(self.window, [complex(*p) for p in report.points],
                                                   self.continuum, box))
            return ("passed" if ok else "failed"), report.model_dump()

        elif name == "orientation":
            profile = await asyncio.to_thread(orientation_class, self.map, self.scene.trials, self.window,
                                              settings.seed)
            return "passed", profile.model_dump()

        elif name == "outchannel-scan":
            partition = await self._get_partition()
            classification = await self._get_classification()
            chains = await asyncio.to_thread(outchannel_scan, self.continuum, self.map, partition,
                                             self.scene.delta, self.scene.eta, classification)
            return "passed", {"chains": [c.model_dump() for c in chains]}

        else:
            raise ValueError(f"Unknown task: {name}")

    async def _get_partition(self) -> KPPartition:
        if self._partition is not None:
            return self._partition
        if settings.use_cache:
            cached = await cache_manager.get_partition(self.continuum, self.window, self.h)
            if cached is not None:
                self._partition = KPPartition.from_json(cached, self.continuum)
                return self._partition
        self._partition = await asyncio.to_thread(maximal_balls, self.continuum, self.window, self.h)
        if settings.use_cache:
            await cache_manager.set_partition(self.continuum, self.window, self.h, self._partition.to_json())
        return self._partition

    async def _get_classification(self):
        if self._classification is None:
            partition = await self._get_partition()
            self._classification = await asyncio.to_thread(classify_chords, self.map, partition,
                                                           self.scene.delta, self.scene.eta, settings.seed)
        return self._classification

    async def _get_curve(self) -> OrientedClosedCurve:
        if self._curve is None:
            if self.scene.curve:
                self._curve = OrientedClosedCurve(self.scene.curve)
            else:
                mesh = self.scene.mesh or 0.05 * self.window.diameter
                bumped = await asyncio.to_thread(bumping_curve, self.continuum, self.map, mesh)
                self._curve = bumped.curve
        return self._curve

    async def _get_curve_partition(self) -> np.ndarray:
        if self._curve_partition is None:
            S = await self._get_curve()
            if self.scene.partition is not None:
                self._curve_partition = np.asarray(self.scene.partition, dtype=float)
            else:
                X = None if self.scene.curve else self.continuum
                self._curve_partition = await asyncio.to_thread(auto_partition, self.map, S, X)
        return self._curve_partition

    def _figure(self, name: str, figure) -> None:
        if self.svg:
            self.figures.append(figure.save(self.out_dir / f"{name}.svg"))


def write_report(report: Report, timing: Dict[str, float], out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "report.json"
    path.write_text(json.dumps(report.model_dump(), indent=2, sort_keys=True) + "\n")
    (out_dir / "timing.json").write_text(json.dumps(timing, indent=2, sort_keys=True) + "\n")
    return path


async def run(scene_path: Path, out_dir: Optional[Path] = None, svg: bool = False, seed: Optional[int] = None,
              resolution: Optional[int] = None, tolerance: Optional[float] = None) -> int:
    """Run one scene file; returns the process exit code."""
    try:
        raw = Path(scene_path).read_bytes()
    except OSError as e:
        logger.error("Scene unreadable", path=str(scene_path), error=str(e))
        return 2
    try:
        scene = load_scene(raw)
        if resolution is not None:
            scene = scene.model_copy(update={"resolution": resolution})
        runner = SceneRunner(scene, raw.decode("utf-8", errors="replace"), out_dir, svg)
    except SceneParseError as e:
        logger.error("Scene parse error", path=str(scene_path), error=str(e), line=e.line, column=e.column)
        print(f"{scene_path}: {e}", file=sys.stderr)
        return 2

    saved = (settings.seed, settings.tolerance)
    settings.seed = seed if seed is not None else (scene.seed if scene.seed is not None else settings.seed)
    if tolerance is not None or scene.tolerance is not None:
        settings.tolerance = tolerance if tolerance is not None else scene.tolerance
    try:
        results, timing = await runner.run()
        passed = all(r.status != "failed" for r in results)
        report = Report(tool=settings.tool_name, version=settings.tool_version,
                        input_hash=hashlib.sha256(raw).hexdigest(), seed=settings.seed, passed=passed,
                        tasks=results)
    finally:
        settings.seed, settings.tolerance = saved
    path = write_report(report, timing, runner.out_dir)
    logger.info("Report written", path=str(path), passed=passed, tasks=len(results),
                figures=len(runner.figures))
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plane-topo", description=__doc__)
    parser.add_argument("--scene", required=True, type=Path, help="Scene JSON file")
    parser.add_argument("--out", type=Path, default=None, help="Output directory for report and figures")
    parser.add_argument("--svg", action="store_true", help="Write SVG figures")
    parser.add_argument("--seed", type=int, default=None, help="Random seed")
    parser.add_argument("--resolution", type=int, default=None, help="Raster divisions across the window")
    parser.add_argument("--tolerance", type=float, default=None, help="Geometric tolerance")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, settings.log_level.upper(), logging.INFO),
                        stream=sys.stderr, format="%(message)s")
    return asyncio.run(run(args.scene, args.out, args.svg, args.seed, args.resolution, args.tolerance))


if __name__ == "__main__":
    sys.exit(main())
