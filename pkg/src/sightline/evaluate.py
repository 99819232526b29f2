"""Batch evaluation: rolls policies over episode sets under each collision
mode, computes success rate and success-weighted path length, and writes
diff-friendly report files.

Outputs are canonically ordered, so the parallelism degree never changes
their bytes. The per-episode SPL term uses l / max(p, l) (clamped to [0, 1];
a zero-length optimum counts as 1 on success); the raw l/p ratio is logged
alongside in the records table.
"""
from __future__ import annotations

import csv
import io
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np

from .dynamics import CollisionMode, MotionConfig
from .env import EpisodeSpec, InspectionEnv, Reason, RewardConfig
from .errors import EmptyRecordSet
from .grid import GridMap, inflate, load_map
from .policies import make_policy
from .sensor import SensorConfig


@dataclass(frozen=True)
class EvalRecord:
    episode_id: int
    map_path: str
    policy: str
    mode: str
    success: int
    reason: str
    steps: int
    collisions: int
    path_length_m: float
    oracle_length_m: float
    spl_term: float
    raw_ratio: float | None
    seed: int


@dataclass(frozen=True)
class Report:
    policy: str
    mode: str
    n: int
    sr: float
    spl: float
    mean_success_path_m: float | None
    mean_oracle_m: float
    records: tuple[EvalRecord, ...]


def spl_term(success: bool, oracle_m: float, path_m: float) -> float:
    if not success:
        return 0.0
    if oracle_m == 0.0:
        return 1.0
    return oracle_m / max(path_m, oracle_m)


def run_episode(
    grid: GridMap,
    ep: EpisodeSpec,
    policy,
    mode: CollisionMode,
    *,
    seed: int = 0,
    sensor: SensorConfig = SensorConfig(),
    motion: MotionConfig = MotionConfig(),
    reward: RewardConfig = RewardConfig(),
    inflated: GridMap | None = None,
    trajectory: list | None = None,
) -> EvalRecord:
    """Roll one episode to termination. Deterministic in (seed, ep.seed,
    policy name). Pass a list as ``trajectory`` to collect the pose at every
    step, including the start."""
    env = InspectionEnv(
        grid, ep, mode=mode, sensor=sensor, motion=motion, reward=reward, inflated=inflated
    )
    rng = np.random.default_rng([seed, ep.seed, zlib.crc32(policy.name.encode())])
    policy.reset(grid=grid, inflated=env.inflated, episode=ep)
    obs = env.reset()
    if trajectory is not None:
        trajectory.append(env.state.pose)
    collisions = 0
    while not env.state.terminated:
        action = policy.act(obs, rng, state=env.state)
        outcome = env.step(action)
        obs = outcome.observation
        collisions += int(outcome.collided)
        if trajectory is not None:
            trajectory.append(env.state.pose)
    success = env.state.reason is Reason.SUCCESS
    p = env.state.path_length
    l = ep.oracle_length_m
    return EvalRecord(
        episode_id=ep.id,
        map_path=ep.map_path,
        policy=policy.name,
        mode=mode.value,
        success=int(success),
        reason=env.state.reason.value,
        steps=env.state.k,
        collisions=collisions,
        path_length_m=p,
        oracle_length_m=l,
        spl_term=spl_term(success, l, p),
        raw_ratio=(l / p) if success and p > 0.0 else None,
        seed=ep.seed,
    )


def success_rate(records) -> float:
    records = list(records)
    if not records:
        raise EmptyRecordSet("success rate over zero episodes is undefined")
    return sum(r.success for r in records) / len(records)


def spl(records) -> float:
    records = list(records)
    if not records:
        raise EmptyRecordSet("SPL over zero episodes is undefined")
    return sum(r.spl_term for r in records) / len(records)


def _aggregate(policy: str, mode: str, records: list[EvalRecord]) -> Report:
    sr = success_rate(records)
    spl_value = spl(records)
    assert spl_value <= sr + 1e-12, "per-term SPL clamp guarantees SPL <= SR"
    success_paths = [r.path_length_m for r in records if r.success]
    return Report(
        policy=policy,
        mode=mode,
        n=len(records),
        sr=sr,
        spl=spl_value,
        mean_success_path_m=(sum(success_paths) / len(success_paths)) if success_paths else None,
        mean_oracle_m=sum(r.oracle_length_m for r in records) / len(records),
        records=tuple(records),
    )


# Worker-side cache: map path -> (grid, inflated), built lazily per process.
_WORKER = {}


def _init_worker(episodes_dir, sensor, motion, reward, inflate_radius, seed):
    _WORKER.clear()
    _WORKER["cfg"] = (episodes_dir, sensor, motion, reward, inflate_radius, seed)
    _WORKER["maps"] = {}


def _worker_maps(map_path: str) -> tuple[GridMap, GridMap]:
    episodes_dir = _WORKER["cfg"][0]
    cache = _WORKER["maps"]
    if map_path not in cache:
        resolved = FsPath(map_path)
        if not resolved.is_absolute() and episodes_dir is not None:
            resolved = FsPath(episodes_dir) / resolved
        grid = load_map(resolved.read_bytes())
        cache[map_path] = (grid, inflate(grid, _WORKER["cfg"][4]))
    return cache[map_path]


def _eval_task(args):
    policy_name, mode_value, ep, want_traj = args
    _, sensor, motion, reward, _, seed = _WORKER["cfg"]
    grid, inflated = _worker_maps(ep.map_path)
    policy = make_policy(policy_name, sensor=sensor, motion=motion)
    traj = [] if want_traj else None
    record = run_episode(
        grid,
        ep,
        policy,
        CollisionMode(mode_value),
        seed=seed,
        sensor=sensor,
        motion=motion,
        reward=reward,
        inflated=inflated,
        trajectory=traj,
    )
    return record, traj


def evaluate(
    episodes: list[EpisodeSpec],
    policies: list[str],
    modes: list[CollisionMode],
    *,
    episodes_dir=None,
    seed: int = 0,
    jobs: int = 1,
    sensor: SensorConfig = SensorConfig(),
    motion: MotionConfig = MotionConfig(),
    reward: RewardConfig = RewardConfig(),
    inflate_radius: float = 0.18,
    trajectories: bool = False,
) -> tuple[list[Report], dict]:
    """Full cross product of (policy, mode) over the episode list.

    Returns the reports (in the given policy-major, mode-minor order) and a
    dict of trajectories keyed by (policy, mode, episode id) when requested.
    Results are identical for any ``jobs`` value.
    """
    if jobs > 1 and any(not ep.map_path for ep in episodes):
        raise ValueError("parallel evaluation needs episodes that reference map files")
    tasks = [
        (policy, mode.value, ep, trajectories)
        for policy in policies
        for mode in modes
        for ep in episodes
    ]
    _init_worker(episodes_dir, sensor, motion, reward, inflate_radius, seed)
    if jobs <= 1:
        results = [_eval_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(
            max_workers=jobs,
            initializer=_init_worker,
            initargs=(episodes_dir, sensor, motion, reward, inflate_radius, seed),
        ) as pool:
            results = list(pool.map(_eval_task, tasks, chunksize=8))
    reports = []
    trajs = {}
    i = 0
    for policy in policies:
        for mode in modes:
            group = []
            for ep in episodes:
                record, traj = results[i]
                i += 1
                group.append(record)
                if trajectories:
                    trajs[(policy, mode.value, ep.id)] = traj
            reports.append(_aggregate(policy, mode.value, group))
    return reports, trajs


# ---------------------------------------------------------------------------
# Report serialization

RECORD_COLUMNS = (
    "policy",
    "mode",
    "episode_id",
    "map",
    "success",
    "reason",
    "steps",
    "collisions",
    "path_length_m",
    "oracle_length_m",
    "spl_term",
    "raw_ratio",
    "seed",
)


def report_document(reports: list[Report], config: dict) -> str:
    """Stable JSON document: resolved run configuration plus one summary per
    (policy, mode) group."""
    groups = [
        {
            "policy": r.policy,
            "mode": r.mode,
            "n": r.n,
            "sr": r.sr,
            "spl": r.spl,
            "mean_success_path_m": r.mean_success_path_m,
            "mean_oracle_m": r.mean_oracle_m,
        }
        for r in reports
    ]
    return json.dumps({"config": config, "groups": groups}, indent=2) + "\n"


def records_table(reports: list[Report]) -> str:
    """Flat CSV of every episode record, one row each, header first."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for report in reports:
        for r in report.records:
            writer.writerow(
                [
                    r.policy,
                    r.mode,
                    r.episode_id,
                    r.map_path,
                    r.success,
                    r.reason,
                    r.steps,
                    r.collisions,
                    repr(r.path_length_m),
                    repr(r.oracle_length_m),
                    repr(r.spl_term),
                    "" if r.raw_ratio is None else repr(r.raw_ratio),
                    r.seed,
                ]
            )
    return buf.getvalue()
