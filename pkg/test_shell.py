"""Scene runner: parsing, task statuses, report files and exit codes."""

import json
from pathlib import Path

import pytest

from config.settings import settings
from errors import SceneParseError
from shell import SceneRunner, build_parser, load_scene, main, run

SQUARE_KP = {"continuum": {"kind": "named", "name": "unit-square"}, "window": [-2, -2, 2, 2], "tasks": ["kp"]}

FIXPOINT = {
    "continuum": {"kind": "named", "name": "unit-square"},
    "map": "z^2",
    "window": [-3, -3, 3, 3],
    "box": [-2, -2, 2, 2],
    "tasks": ["orientation", "fixpoint"],
    "trials": 10,
    "seed": 4,
}


def write_scene(tmp_path: Path, data, name: str = "scene.json") -> Path:
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data, indent=2))
    return path


def read_report(out: Path):
    return json.loads((out / "report.json").read_text())


def test_load_scene_reports_json_position():
    with pytest.raises(SceneParseError) as info:
        load_scene(b'{\n  "tasks": ["kp"],\n  oops\n}')
    assert info.value.line == 3


def test_load_scene_reports_the_offending_key():
    text = json.dumps({"continuum": {"kind": "named", "name": "unit-square"}, "tasks": ["paint"]}, indent=2)
    with pytest.raises(SceneParseError) as info:
        load_scene(text.encode())
    assert "tasks" in str(info.value)
    assert info.value.line == text.splitlines().index('  "tasks": [') + 1


def test_map_syntax_error_carries_its_column():
    scene = load_scene(json.dumps({**SQUARE_KP, "map": "z + * 2"}).encode())
    with pytest.raises(SceneParseError) as info:
        SceneRunner(scene, json.dumps(SQUARE_KP))
    assert info.value.column == 5


def test_window_must_contain_the_continuum():
    scene = load_scene(json.dumps({**SQUARE_KP, "window": [0, 0, 2, 2]}).encode())
    with pytest.raises(SceneParseError):
        SceneRunner(scene)


@pytest.mark.asyncio
async def test_unit_square_partition_scene(tmp_path):
    out = tmp_path / "out"
    code = await run(write_scene(tmp_path, SQUARE_KP), out, svg=True)
    assert code == 0
    report = read_report(out)
    assert report["passed"]
    assert report["tool"] == "plane-topo"
    (kp,) = report["tasks"]
    assert kp["status"] == "passed"
    assert kp["data"]["summary"]["with_interior"] == 5
    assert len(kp["data"]["interior"]) == 5
    assert (out / "kp.svg").read_text().startswith("<?xml")
    assert "kp" in json.loads((out / "timing.json").read_text())
    assert "timing" not in report


@pytest.mark.asyncio
async def test_tasks_without_a_map_are_inapplicable(tmp_path):
    out = tmp_path / "out"
    scene = {**SQUARE_KP, "tasks": ["index", "kp"]}
    assert await run(write_scene(tmp_path, scene), out) == 0
    tasks = read_report(out)["tasks"]
    assert [t["task"] for t in tasks] == ["kp", "index"]
    assert tasks[1]["status"] == "inapplicable"
    assert tasks[1]["error"]["type"] == "MissingMap"


@pytest.mark.asyncio
async def test_fixpoint_and_orientation_scene(tmp_path):
    out = tmp_path / "out"
    assert await run(write_scene(tmp_path, FIXPOINT), out) == 0
    report = read_report(out)
    assert report["seed"] == 4
    orientation, fixpoint = report["tasks"]
    assert orientation["data"]["classification"] == "positive"
    assert fixpoint["data"]["points"] == pytest.approx([[0.0, 0.0], [1.0, 0.0]], abs=1e-8)


@pytest.mark.asyncio
async def test_reports_are_reproducible(tmp_path):
    path = write_scene(tmp_path, FIXPOINT)
    await run(path, tmp_path / "a")
    await run(path, tmp_path / "b")
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


@pytest.mark.asyncio
async def test_scene_seed_and_tolerance_do_not_leak(tmp_path):
    before = (settings.seed, settings.tolerance)
    scene = {**FIXPOINT, "seed": 17, "tolerance": 1e-8}
    assert await run(write_scene(tmp_path, scene), tmp_path / "a") == 0
    assert read_report(tmp_path / "a")["seed"] == 17
    assert (settings.seed, settings.tolerance) == before
    assert await run(write_scene(tmp_path, FIXPOINT, "plain.json"), tmp_path / "b", seed=9) == 0
    assert read_report(tmp_path / "b")["seed"] == 9
    assert settings.seed == before[0]


@pytest.mark.asyncio
async def test_parse_errors_exit_with_two(tmp_path):
    assert await run(write_scene(tmp_path, "{ not json"), tmp_path / "out") == 2
    assert await run(tmp_path / "missing.json", tmp_path / "out") == 2
    assert not (tmp_path / "out" / "report.json").exists()


@pytest.mark.asyncio
async def test_hypothesis_violation_is_inapplicable(tmp_path):
    out = tmp_path / "out"
    scene = {
        "continuum": {"kind": "named", "name": "unit-square"},
        "map": "2*z",
        "window": [-3, -3, 3, 3],
        "curve": [[-1.5, -1.5], [1.5, -1.5], [1.5, 1.5], [-1.5, 1.5]],
        "tasks": ["ivp1"],
    }
    assert await run(write_scene(tmp_path, scene), out) == 0
    (ivp1,) = read_report(out)["tasks"]
    assert ivp1["status"] == "inapplicable"
    assert ivp1["error"]["type"] == "NoValidPartition"
    assert ivp1["data"] == {"index": 1}


def test_command_line(tmp_path):
    out = tmp_path / "cli"
    path = write_scene(tmp_path, SQUARE_KP)
    args = build_parser().parse_args(["--scene", str(path), "--out", str(out), "--resolution", "256"])
    assert args.resolution == 256 and not args.svg
    assert main(["--scene", str(path), "--out", str(out), "--resolution", "256"]) == 0
    assert read_report(out)["tasks"][0]["data"]["summary"]["spacing"] == pytest.approx(4 / 256)


SCENES = sorted((Path(__file__).parent / "scenes").glob("*.json"))


@pytest.mark.parametrize("path", SCENES, ids=[p.stem for p in SCENES])
def test_shipped_scenes_parse(path):
    text = path.read_text()
    runner = SceneRunner(load_scene(text.encode()), text)
    assert runner.scene.tasks


@pytest.mark.asyncio
async def test_shipped_lollipop_scene(tmp_path):
    out = tmp_path / "out"
    path = Path(__file__).parent / "scenes" / "horseshoe-lollipop.json"
    assert await run(path, out) == 0
    tasks = {t["task"]: t for t in read_report(out)["tasks"]}
    assert tasks["index"]["data"] == {"index": 0}
    assert tasks["ivp1"]["status"] == "passed"
    assert tasks["lollipop"]["data"]["side"] == "R"
    assert tasks["lollipop"]["data"]["identity_holds"]


@pytest.mark.asyncio
async def test_shipped_segment_scene_reports_ivp1_inapplicable(tmp_path):
    out = tmp_path / "out"
    assert await run(Path(__file__).parent / "scenes" / "segment-ivp1.json", out) == 0
    tasks = {t["task"]: t for t in read_report(out)["tasks"]}
    assert tasks["index"]["data"] == {"index": 0}
    assert tasks["ivp1"]["status"] == "inapplicable"
    assert tasks["ivp1"]["error"]["type"] == "NoValidPartition"
    assert tasks["ivp1"]["data"] == {"index": 0}
