"""Command-line entry point.

Subcommands: ``mapgen``, ``episodes``, ``oracle``, ``eval``, ``render``.
Every subcommand is deterministic given its flags and seeds, and every
output artifact embeds the resolved semantic configuration (seeds, counts,
bands, physics parameters, and input-content hashes; never output paths or
the parallelism degree, so reruns and different job counts stay
byte-identical).

A ``--config FILE`` may supply any long flag as a ``key = value`` line
('#' starts a comment; keys use underscores). Precedence: command line over
config file over built-in defaults.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import sys
from pathlib import Path as FsPath

from .dynamics import CollisionMode, MotionConfig
from .env import (
    EpisodeSpec,
    RewardConfig,
    SamplerConfig,
    load_episodes,
    sample_episode,
    save_episodes,
)
from .errors import (
    SamplingExhausted,
    SightlineError,
    UnknownMode,
    UnknownPolicy,
    UsageError,
)
from .evaluate import evaluate, records_table, report_document
from .grid import (
    DEFAULT_AGENT_RADIUS,
    DEFAULT_RESOLUTION,
    GridMap,
    MapGenSpec,
    generate_map,
    inflate,
    load_map,
    save_map,
)
from .oracle import (
    candidate_goal_set,
    navigation_visibility_prefix,
    shortest_inspection_path,
    shortest_navigation_path,
)
from .policies import POLICY_NAMES, make_policy
from .render import render_scene, save_png
from .sensor import SensorConfig


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_config_file(path: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(FsPath(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config_file(
    args: argparse.Namespace,
    provided: set[str],
    command_parser: argparse.ArgumentParser,
) -> None:
    """Overlay config-file values onto flags the command line left at their
    defaults; values parse per the subcommand's flag types. Precedence:
    command line over file over defaults."""
    file_values = _read_config_file(args.config)
    known = {a.dest: a for a in command_parser._actions}
    for key, raw in file_values.items():
        if key in ("help", "config"):
            continue
        action = known.get(key)
        if action is None:
            raise UsageError(f"{args.config}: unknown configuration key {key!r}")
        if key in provided:
            continue
        if action.nargs in ("+", "*"):
            value = [v for v in (s.strip() for s in raw.split(",")) if v]
        elif action.type is int:
            value = int(raw)
        elif action.type is float:
            value = float(raw)
        elif isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        else:
            value = raw
        setattr(args, key, value)


def _sha256(path: FsPath) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _resolve_maps(map_args: list[str]) -> list[FsPath]:
    """Accept map files, directories of map files, or manifest.json files."""
    out: list[FsPath] = []
    for arg in map_args:
        p = FsPath(arg)
        if p.is_dir():
            manifest = p / "manifest.json"
            if manifest.exists():
                out.extend(_resolve_maps([str(manifest)]))
            else:
                out.extend(sorted(p.glob("*.txt")))
        elif p.name == "manifest.json":
            data = json.loads(p.read_text())
            out.extend(p.parent / entry["file"] for entry in data["maps"])
        else:
            out.append(p)
    if not out:
        raise UsageError("no map files found")
    return out


def _sensor_from(args) -> SensorConfig:
    return SensorConfig(fov=args.fov, n_rays=args.n_rays, max_range=args.max_range)


def _motion_from(args) -> MotionConfig:
    return MotionConfig(s_max=args.s_max, phi_max=args.phi_max)


def _add_sensor_motion_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fov", type=float, default=math.pi / 2, help="sensor field of view, radians")
    p.add_argument("--n-rays", type=int, default=64, help="depth rays per scan")
    p.add_argument("--max-range", type=float, default=5.0, help="sensor range, meters")
    p.add_argument("--s-max", type=float, default=0.35, help="max forward step, meters")
    p.add_argument("--phi-max", type=float, default=math.pi / 4, help="max rotation step, radians")
    p.add_argument(
        "--inflate-radius",
        type=float,
        default=DEFAULT_AGENT_RADIUS,
        help="agent embodiment radius used for planning and collisions, meters",
    )


# ---------------------------------------------------------------------------
# Subcommands


def cmd_mapgen(args) -> int:
    if not 0.0 <= args.density < 1.0:
        raise UsageError("--density must lie in [0, 1)")
    if args.count < 1:
        raise UsageError("--count must be positive")
    out_dir = FsPath(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = {
        "width": args.width,
        "height": args.height,
        "resolution": args.resolution,
        "rooms": args.rooms,
        "density": args.density,
        "corridor_width": args.corridor_width,
        "count": args.count,
        "seed": args.seed,
    }
    entries = []
    for i in range(args.count):
        seed = args.seed + i
        grid = generate_map(
            MapGenSpec(
                width=args.width,
                height=args.height,
                resolution=args.resolution,
                rooms=args.rooms,
                obstacle_density=args.density,
                corridor_width=args.corridor_width,
                seed=seed,
            )
        )
        name = f"map_{i:03d}.txt"
        (out_dir / name).write_bytes(save_map(grid))
        entries.append({"file": name, "seed": seed})
    manifest = {"config": config, "maps": entries}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {args.count} maps and manifest.json to {out_dir}")
    return 0


def cmd_episodes(args) -> int:
    map_files = _resolve_maps(args.maps)
    if args.count < 1:
        raise UsageError("--count must be positive")
    out_path = FsPath(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    sampler = SamplerConfig(
        dist_min=args.dist_min,
        dist_max=args.dist_max,
        ratio_min=args.ratio_min,
        ratio_max=args.ratio_max,
        max_range=args.max_range,
        inflate_radius=args.inflate_radius,
        max_attempts=args.max_attempts,
    )
    config = {
        "seed": args.seed,
        "count": args.count,
        "dist_min": sampler.dist_min,
        "dist_max": sampler.dist_max,
        "ratio_min": sampler.ratio_min,
        "ratio_max": sampler.ratio_max,
        "max_range": sampler.max_range,
        "inflate_radius": sampler.inflate_radius,
        "maps": [f.name for f in map_files],
        "map_sha256": [_sha256(f) for f in map_files],
    }
    quotas = [
        args.count // len(map_files) + (1 if i < args.count % len(map_files) else 0)
        for i in range(len(map_files))
    ]
    episodes: list[EpisodeSpec] = []
    index = 0
    for map_file, quota in zip(map_files, quotas):
        grid = load_map(map_file.read_bytes())
        infl = inflate(grid, sampler.inflate_radius)
        rel = map_file.resolve().relative_to(out_path.parent.resolve()) \
            if map_file.resolve().is_relative_to(out_path.parent.resolve()) \
            else map_file.resolve()
        for _ in range(quota):
            seed = (args.seed * 1_000_000_007 + index) % (2**63)
            try:
                episodes.append(
                    sample_episode(
                        grid,
                        sampler,
                        seed,
                        inflated=infl,
                        episode_id=index,
                        map_path=str(rel),
                    )
                )
            except SamplingExhausted as exc:
                print(f"warning: {map_file.name} episode {index}: {exc}", file=sys.stderr)
            index += 1
    save_episodes(out_path, episodes, config)
    print(f"wrote {len(episodes)} episodes to {out_path}")
    return 0


def _load_for_episode(ep: EpisodeSpec, episodes_dir: FsPath, cache: dict) -> GridMap:
    if ep.map_path not in cache:
        p = FsPath(ep.map_path)
        if not p.is_absolute():
            p = episodes_dir / p
        cache[ep.map_path] = load_map(p.read_bytes())
    return cache[ep.map_path]


def cmd_oracle(args) -> int:
    _, episodes = load_episodes(args.episodes)
    if not episodes:
        raise SightlineError(f"no episodes in {args.episodes}")
    episodes_dir = FsPath(args.episodes).parent
    cache: dict[str, GridMap] = {}
    inflated: dict[str, GridMap] = {}
    inspection = []
    until_visible = []
    for ep in episodes:
        grid = _load_for_episode(ep, episodes_dir, cache)
        if ep.map_path not in inflated:
            inflated[ep.map_path] = inflate(grid, args.inflate_radius)
        infl = inflated[ep.map_path]
        orc = shortest_inspection_path(
            grid, ep.start.position, ep.target, args.max_range, inflated=infl
        )
        if abs(orc.length - ep.oracle_length_m) > 1e-9:
            raise SightlineError(
                f"episode {ep.id}: stored ground-truth length {ep.oracle_length_m} "
                f"disagrees with recomputation {orc.length}"
            )
        nav = shortest_navigation_path(grid, ep.start.position, ep.target, inflated=infl)
        prefix = navigation_visibility_prefix(grid, nav, ep.target, args.max_range)
        inspection.append(orc.length)
        until_visible.append(prefix)
    finite = [v for v in until_visible if math.isfinite(v)]
    mean_inspection = sum(inspection) / len(inspection)
    mean_nav = sum(finite) / len(finite) if finite else math.inf
    lines = [
        f"episodes: {len(episodes)}",
        f"mean_inspection_m: {mean_inspection:.6f}",
        f"mean_nav_until_visible_m: {mean_nav:.6f}",
        f"gap_m: {mean_nav - mean_inspection:.6f}",
    ]
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        FsPath(args.out).write_text(text)
    return 0


def cmd_eval(args) -> int:
    for name in args.policy:
        make_policy(name)  # validate early; raises UnknownPolicy
    modes = [CollisionMode.from_name(m) for m in args.mode]
    config_rec, episodes = load_episodes(args.episodes)
    if not episodes:
        raise SightlineError(f"no episodes in {args.episodes}")
    out_dir = FsPath(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sensor = _sensor_from(args)
    motion = _motion_from(args)
    reports, trajs = evaluate(
        episodes,
        list(args.policy),
        modes,
        episodes_dir=FsPath(args.episodes).parent,
        seed=args.seed,
        jobs=args.jobs,
        sensor=sensor,
        motion=motion,
        inflate_radius=args.inflate_radius,
        trajectories=args.trajectories,
    )
    config = {
        "seed": args.seed,
        "policies": list(args.policy),
        "modes": [m.value for m in modes],
        "episodes_file": FsPath(args.episodes).name,
        "episodes_sha256": _sha256(FsPath(args.episodes)),
        "fov": sensor.fov,
        "n_rays": sensor.n_rays,
        "max_range": sensor.max_range,
        "s_max": motion.s_max,
        "phi_max": motion.phi_max,
        "inflate_radius": args.inflate_radius,
        "reward": dataclasses.asdict(RewardConfig()),
    }
    (out_dir / "report.json").write_text(report_document(reports, config))
    (out_dir / "records.csv").write_text(records_table(reports))
    if args.trajectories:
        traj_dir = out_dir / "trajectories"
        traj_dir.mkdir(exist_ok=True)
        for (policy, mode, ep_id), poses in trajs.items():
            lines = [json.dumps([p.x, p.y, p.theta]) for p in poses]
            name = f"traj_{policy}_{mode}_{ep_id:05d}.jsonl"
            (traj_dir / name).write_text("\n".join(lines) + "\n")
    for r in reports:
        print(
            f"{r.policy:>10s} {r.mode:>6s}  n={r.n:<4d} SR={r.sr:.4f} SPL={r.spl:.4f}"
        )
    return 0


def cmd_render(args) -> int:
    grid = load_map(FsPath(args.map).read_bytes())
    goal_mask = None
    inspection = None
    nav = None
    nav_split = None
    start = None
    target = None
    if args.episodes is not None:
        _, episodes = load_episodes(args.episodes)
        matches = [e for e in episodes if e.id == args.episode_id]
        if not matches:
            raise UsageError(f"episode id {args.episode_id} not found in {args.episodes}")
        ep = matches[0]
        infl = inflate(grid, args.inflate_radius)
        goals = candidate_goal_set(grid, ep.target, args.max_range, inflated=infl)
        goal_mask = goals.mask
        inspection = shortest_inspection_path(
            grid, ep.start.position, ep.target, args.max_range, inflated=infl
        ).inspection_path
        nav = shortest_navigation_path(grid, ep.start.position, ep.target, inflated=infl)
        nav_split = len(nav.cells)
        for i, cell in enumerate(nav.cells):
            if cell in goals:
                nav_split = i
                break
        start = ep.start.position
        target = ep.target
    trajectory = None
    if args.trajectory is not None:
        from .dynamics import Pose

        trajectory = [
            Pose(*json.loads(line))
            for line in FsPath(args.trajectory).read_text().splitlines()
            if line.strip()
        ]
    image = render_scene(
        grid,
        goal_mask=goal_mask,
        inspection_path=inspection,
        nav_path=nav,
        nav_split=nav_split,
        trajectory=trajectory,
        start=start,
        target=target,
        scale=args.scale,
    )
    save_png(image, args.out)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> tuple[_Parser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="sightline", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    commands: dict[str, argparse.ArgumentParser] = {}

    p = sub.add_parser("mapgen", help="generate procedural maps")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=200)
    p.add_argument("--height", type=int, default=200)
    p.add_argument("--resolution", type=float, default=DEFAULT_RESOLUTION)
    p.add_argument("--rooms", type=int, default=6)
    p.add_argument("--density", type=float, default=0.08)
    p.add_argument("--corridor-width", type=int, default=16)
    p.add_argument("--out-dir", default="maps")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_mapgen)

    p = sub.add_parser("episodes", help="sample episodes with ground truth")
    p.add_argument("--maps", nargs="+", required=True, help="map files, a directory, or manifest.json")
    p.add_argument("--count", type=int, default=100, help="total episodes across all maps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dist-min", type=float, default=3.5)
    p.add_argument("--dist-max", type=float, default=4.5)
    p.add_argument("--ratio-min", type=float, default=1.1)
    p.add_argument("--ratio-max", type=float, default=1.5)
    p.add_argument("--max-range", type=float, default=5.0)
    p.add_argument("--inflate-radius", type=float, default=DEFAULT_AGENT_RADIUS)
    p.add_argument("--max-attempts", type=int, default=10_000)
    p.add_argument("--out", default="episodes.jsonl")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_episodes)

    p = sub.add_parser("oracle", help="ground-truth statistics for an episode file")
    p.add_argument("--episodes", required=True)
    p.add_argument("--max-range", type=float, default=5.0)
    p.add_argument("--inflate-radius", type=float, default=DEFAULT_AGENT_RADIUS)
    p.add_argument("--out", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("eval", help="evaluate policies over an episode file")
    p.add_argument("--episodes", required=True)
    p.add_argument("--policy", nargs="+", default=["random"], help=f"any of: {', '.join(POLICY_NAMES)}")
    p.add_argument("--mode", nargs="+", default=["slide"], help="slide, stop, strict")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default="eval_out")
    p.add_argument("--trajectories", action="store_true", help="also write per-episode pose logs")
    _add_sensor_motion_flags(p)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="render a map (optionally with episode overlays) to PNG")
    p.add_argument("--map", required=True)
    p.add_argument("--episodes", default=None)
    p.add_argument("--episode-id", type=int, default=0)
    p.add_argument("--trajectory", default=None, help="pose log (JSONL of [x, y, theta])")
    p.add_argument("--max-range", type=float, default=5.0)
    p.add_argument("--inflate-radius", type=float, default=DEFAULT_AGENT_RADIUS)
    p.add_argument("--scale", type=int, default=4)
    p.add_argument("--out", default="scene.png")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_render)

    for name, action in sub.choices.items():
        commands[name] = action
    return parser, commands


def _provided_flags(argv: list[str]) -> set[str]:
    """Dests of flags explicitly present on the command line, found by
    re-parsing with every default suppressed (subparsers only copy over
    attributes that were actually set)."""
    sentinel, commands = build_parser()
    for p in [sentinel, *commands.values()]:
        p._defaults.clear()
        for action in p._actions:
            action.default = argparse.SUPPRESS
    try:
        seen = sentinel.parse_args(argv)
    except UsageError:
        return set()
    return set(vars(seen))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, commands = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            _apply_config_file(args, _provided_flags(argv), commands[args.command])
        return args.func(args)
    except (UsageError, UnknownMode, UnknownPolicy) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SightlineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
