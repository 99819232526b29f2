import json
import math

import numpy as np
import pytest

from sightline.cli import main
from sightline.env import load_episodes
from sightline.grid import GridIndex, WorldPoint, grid_to_world, load_map
from sightline.oracle import candidate_goal_set
from sightline.render import COLOR_GOAL, render_scene

MAPGEN = ["mapgen", "--count", "2", "--seed", "7", "--width", "110", "--height", "110",
          "--rooms", "4", "--density", "0.06", "--corridor-width", "14"]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    maps_dir = root / "maps"
    assert main(MAPGEN + ["--out-dir", str(maps_dir)]) == 0
    episodes = root / "episodes.jsonl"
    assert main([
        "episodes", "--maps", str(maps_dir / "manifest.json"),
        "--count", "6", "--seed", "3", "--out", str(episodes),
    ]) == 0
    return root


def test_mapgen_reruns_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(MAPGEN + ["--out-dir", str(a)]) == 0
    assert main(MAPGEN + ["--out-dir", str(b)]) == 0
    for name in ("map_000.txt", "map_001.txt", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_mapgen_manifest_lists_outputs(workspace):
    manifest = json.loads((workspace / "maps" / "manifest.json").read_text())
    files = [e["file"] for e in manifest["maps"]]
    assert files == ["map_000.txt", "map_001.txt"]
    for name in files:
        assert (workspace / "maps" / name).exists()
    assert manifest["config"]["seed"] == 7


def test_mapgen_rejects_bad_density(tmp_path, capsys):
    assert main(["mapgen", "--density", "1.5", "--out-dir", str(tmp_path)]) == 1
    assert "density" in capsys.readouterr().err


def test_bad_flag_is_usage_error(capsys):
    assert main(["mapgen", "--count", "not-a-number"]) == 1


def test_episodes_rerun_byte_identical(workspace, tmp_path):
    twin = tmp_path / "episodes.jsonl"
    assert main([
        "episodes", "--maps", str(workspace / "maps" / "manifest.json"),
        "--count", "6", "--seed", "3", "--out", str(twin),
    ]) == 0
    # map paths are stored relative to each episode file, so compare records
    a_cfg, a_eps = load_episodes(workspace / "episodes.jsonl")
    b_cfg, b_eps = load_episodes(twin)
    assert a_cfg == b_cfg
    assert [(e.start, e.target, e.oracle_length_m) for e in a_eps] == \
        [(e.start, e.target, e.oracle_length_m) for e in b_eps]


def test_episodes_respect_constraints(workspace):
    config, episodes = load_episodes(workspace / "episodes.jsonl")
    assert config["dist_min"] == 3.5 and config["ratio_max"] == 1.5
    assert len(episodes) == 6
    for ep in episodes:
        d = math.hypot(ep.start.x - ep.target.x, ep.start.y - ep.target.y)
        assert 3.5 <= d <= 4.5


def test_oracle_command_dominance(workspace, capsys):
    assert main(["oracle", "--episodes", str(workspace / "episodes.jsonl")]) == 0
    out = capsys.readouterr().out
    values = dict(line.split(": ") for line in out.strip().split("\n"))
    assert float(values["mean_inspection_m"]) <= float(values["mean_nav_until_visible_m"])
    assert float(values["gap_m"]) >= 0.0


def test_oracle_command_missing_file(tmp_path):
    assert main(["oracle", "--episodes", str(tmp_path / "nope.jsonl")]) == 2


def test_oracle_command_empty_file(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    assert main(["oracle", "--episodes", str(empty)]) == 2
    assert "no episodes" in capsys.readouterr().err


def test_eval_unknown_policy_lists_valid_ids(workspace, capsys):
    rc = main([
        "eval", "--episodes", str(workspace / "episodes.jsonl"),
        "--policy", "ddppo",
    ])
    assert rc == 1
    err = capsys.readouterr().err
    assert "inspector" in err and "random" in err


def test_eval_unknown_mode(workspace, capsys):
    rc = main([
        "eval", "--episodes", str(workspace / "episodes.jsonl"),
        "--mode", "bounce",
    ])
    assert rc == 1


def test_eval_reports_embed_config_and_jobs_invariance(workspace, tmp_path):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    base = [
        "eval", "--episodes", str(workspace / "episodes.jsonl"),
        "--policy", "random", "inspector", "--mode", "slide", "strict", "--seed", "5",
    ]
    assert main(base + ["--jobs", "1", "--out-dir", str(out1)]) == 0
    assert main(base + ["--jobs", "4", "--out-dir", str(out2)]) == 0
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "records.csv").read_bytes() == (out2 / "records.csv").read_bytes()
    report = json.loads((out1 / "report.json").read_text())
    assert report["config"]["policies"] == ["random", "inspector"]
    assert report["config"]["seed"] == 5
    assert "episodes_sha256" in report["config"]
    assert {g["policy"] for g in report["groups"]} == {"random", "inspector"}
    strict_inspector = next(
        g for g in report["groups"] if (g["policy"], g["mode"]) == ("inspector", "strict")
    )
    assert strict_inspector["sr"] == 1.0
    assert strict_inspector["spl"] >= 0.95


def test_eval_trajectories_written(workspace, tmp_path):
    out = tmp_path / "traj_run"
    assert main([
        "eval", "--episodes", str(workspace / "episodes.jsonl"),
        "--policy", "inspector", "--mode", "strict",
        "--out-dir", str(out), "--trajectories",
    ]) == 0
    logs = sorted((out / "trajectories").glob("*.jsonl"))
    assert len(logs) == 6
    first = json.loads(logs[0].read_text().splitlines()[0])
    assert len(first) == 3


def test_render_deterministic_and_complete(workspace, tmp_path):
    out1 = tmp_path / "a.png"
    out2 = tmp_path / "b.png"
    args = [
        "render", "--map", str(workspace / "maps" / "map_000.txt"),
        "--episodes", str(workspace / "episodes.jsonl"), "--episode-id", "0",
    ]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert out1.stat().st_size > 0


def test_render_map_only(workspace, tmp_path):
    out = tmp_path / "plain.png"
    assert main(["render", "--map", str(workspace / "maps" / "map_000.txt"),
                 "--out", str(out)]) == 0
    assert out.exists()


def test_render_with_trajectory_log(workspace, tmp_path):
    eval_dir = tmp_path / "eval"
    assert main([
        "eval", "--episodes", str(workspace / "episodes.jsonl"),
        "--policy", "inspector", "--mode", "strict",
        "--out-dir", str(eval_dir), "--trajectories",
    ]) == 0
    traj = sorted((eval_dir / "trajectories").glob("traj_inspector_strict_*.jsonl"))[0]
    episode_id = int(traj.stem.rsplit("_", 1)[1])
    out = tmp_path / "with_traj.png"
    assert main([
        "render", "--map", str(workspace / "maps" / "map_000.txt"),
        "--episodes", str(workspace / "episodes.jsonl"),
        "--episode-id", str(episode_id),
        "--trajectory", str(traj), "--out", str(out),
    ]) == 0
    assert out.stat().st_size > 0


def test_render_goal_overlay_pixel_exact(workspace):
    grid = load_map((workspace / "maps" / "map_000.txt").read_bytes())
    _, episodes = load_episodes(workspace / "episodes.jsonl")
    ep = episodes[0]
    goals = candidate_goal_set(grid, ep.target, 5.0)
    image = render_scene(grid, goal_mask=goals.mask, scale=1)
    painted = {
        (c, grid.height - 1 - r)
        for r, c in zip(*np.nonzero(np.all(image == COLOR_GOAL, axis=2)))
    }
    expected = {(c.col, c.row) for c in goals.cells}
    assert painted == expected


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("width = 120\nheight = 110\nseed = 9\n# comment\n")
    out = tmp_path / "from_cfg"
    assert main(["mapgen", "--config", str(cfg), "--rooms", "4", "--width", "110",
                 "--out-dir", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["width"] == 110  # flag beats file
    assert manifest["config"]["height"] == 110  # file beats default
    assert manifest["config"]["seed"] == 9
    grid = load_map((out / "map_000.txt").read_bytes())
    assert (grid.width, grid.height) == (110, 110)


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("wdith = 120\n")
    assert main(["mapgen", "--config", str(cfg)]) == 1
