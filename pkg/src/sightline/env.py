"""Episode lifecycle: rejection sampling under the distance and
path-difficulty constraints, observation assembly, the shaped reward, and
the step loop that ties dynamics and sensing together.

Episode files are JSON Lines with a stable key order (see
:func:`save_episodes`); an optional leading ``{"type": "config", ...}``
record carries the resolved run configuration.
"""
from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path as FsPath

import numpy as np

from .dynamics import (
    Action,
    CollisionMode,
    MotionConfig,
    Pose,
    ZERO_ACTION,
    step_pose,
)
from .errors import (
    InvalidEpisode,
    MissingHistory,
    NoInspectionPoint,
    SamplingExhausted,
    SteppingTerminatedEpisode,
    Unreachable,
)
from .grid import (
    DEFAULT_AGENT_RADIUS,
    FREE,
    GridIndex,
    GridMap,
    WorldPoint,
    geodesic_distance,
    grid_to_world,
    inflate,
    is_free,
)
from .oracle import shortest_inspection_path
from .sensor import SensorConfig, in_view, render_depth, target_bearing


class Reason(enum.Enum):
    RUNNING = "running"
    SUCCESS = "success"
    COLLISION = "collision"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class RewardConfig:
    """Shaped reward terms; defaults follow the task's published table."""

    success_reward: float = 10.0
    failure_penalty: float = -10.0
    orient_positive_scale: float = 0.2
    nav_scale: float = 2.5
    move_penalty: float = -0.5
    move_threshold: float = 0.0875  # s_max / 4
    move_window: int = 3
    step_penalty: float = -0.05
    max_steps: int = 100


@dataclass(frozen=True)
class SamplerConfig:
    """Episode acceptance bands and budgets."""

    dist_min: float = 3.5
    dist_max: float = 4.5
    ratio_min: float = 1.1
    ratio_max: float = 1.5
    max_range: float = 5.0
    inflate_radius: float = DEFAULT_AGENT_RADIUS
    max_attempts: int = 10_000


@dataclass(frozen=True)
class EpisodeSpec:
    """One evaluation unit: start pose, target point, and the precomputed
    ground-truth answer."""

    id: int
    map_path: str
    start: Pose
    target: WorldPoint
    seed: int
    oracle_length_m: float
    goal_cell: GridIndex
    goal_point: WorldPoint


@dataclass(frozen=True)
class Observation:
    """What a policy sees: the depth scan normalized by max range, the
    agent-to-target vector rotated into the body frame, the wrapped bearing
    error, and the last three actions (most recent first, zero-filled at
    episode start)."""

    depth: np.ndarray
    dp: np.ndarray
    dtheta: float
    last_actions: tuple[Action, Action, Action]


@dataclass
class EnvState:
    pose: Pose
    k: int = 0
    poses: list[Pose] = field(default_factory=list)
    actions: deque = field(default_factory=lambda: deque([ZERO_ACTION] * 3, maxlen=3))
    terminated: bool = False
    reason: Reason = Reason.RUNNING
    path_length: float = 0.0


@dataclass(frozen=True)
class StepOutcome:
    observation: Observation
    reward: float
    terminated: bool
    reason: Reason
    collided: bool


def sample_episode(
    grid: GridMap,
    cfg: SamplerConfig = SamplerConfig(),
    seed: int = 0,
    *,
    inflated: GridMap | None = None,
    episode_id: int = 0,
    map_path: str = "",
) -> EpisodeSpec:
    """Rejection-sample an episode: start uniform over traversable cells
    with a uniform heading, target uniform over traversable cells inside the
    Euclidean distance band, kept only when the geodesic-to-Euclidean ratio
    falls in the configured band and a path to visibility exists.

    Deterministic in the seed. Raises SamplingExhausted after
    ``cfg.max_attempts`` rejected attempts.
    """
    rng = np.random.default_rng(seed)
    infl = inflated if inflated is not None else inflate(grid, cfg.inflate_radius)
    free_rc = np.argwhere(infl.cells == FREE)
    if len(free_rc) == 0:
        raise SamplingExhausted("map has no traversable cells after inflation")
    res = grid.resolution
    centers_x = (free_rc[:, 1] + 0.5) * res
    centers_y = (free_rc[:, 0] + 0.5) * res

    for _ in range(cfg.max_attempts):
        si = int(rng.integers(len(free_rc)))
        srow, scol = int(free_rc[si, 0]), int(free_rc[si, 1])
        theta = float(rng.uniform(-math.pi, math.pi))
        sx, sy = centers_x[si], centers_y[si]
        dists = np.sqrt((centers_x - sx) ** 2 + (centers_y - sy) ** 2)
        band = np.flatnonzero((dists >= cfg.dist_min) & (dists <= cfg.dist_max))
        if len(band) == 0:
            continue
        ti = int(band[int(rng.integers(len(band)))])
        trow, tcol = int(free_rc[ti, 0]), int(free_rc[ti, 1])
        euclid = float(dists[ti])
        geo = geodesic_distance(infl, GridIndex(scol, srow), GridIndex(tcol, trow))
        if not (cfg.ratio_min <= geo / euclid <= cfg.ratio_max):
            continue
        start = Pose(float(sx), float(sy), theta)
        target = grid_to_world(grid, GridIndex(tcol, trow))
        try:
            orc = shortest_inspection_path(
                grid, start.position, target, cfg.max_range, inflated=infl
            )
        except (NoInspectionPoint, Unreachable):
            continue
        return EpisodeSpec(
            id=episode_id,
            map_path=map_path,
            start=start,
            target=target,
            seed=seed,
            oracle_length_m=orc.length,
            goal_cell=orc.goal,
            goal_point=orc.goal_point,
        )
    raise SamplingExhausted(
        f"no episode accepted within {cfg.max_attempts} attempts"
    )


def observe(
    grid: GridMap,
    state: EnvState,
    target: WorldPoint,
    cfg: SensorConfig = SensorConfig(),
) -> Observation:
    """Assemble the policy observation at the current pose."""
    pose = state.pose
    scan = render_depth(grid, pose, cfg)
    dx = target[0] - pose.x
    dy = target[1] - pose.y
    c = math.cos(pose.theta)
    s = math.sin(pose.theta)
    dp = np.array([c * dx + s * dy, -s * dx + c * dy])
    return Observation(
        depth=scan.depths / cfg.max_range,
        dp=dp,
        dtheta=target_bearing(pose, target),
        last_actions=tuple(state.actions),
    )


def reset(
    grid: GridMap,
    ep: EpisodeSpec,
    *,
    sensor: SensorConfig = SensorConfig(),
) -> tuple[EnvState, Observation]:
    """Fresh state at the episode's start pose. The episode is already
    successful (zero steps) when the target is in view from the start."""
    if not is_free(grid, ep.start.position):
        raise InvalidEpisode("episode start pose is not in a free cell")
    state = EnvState(pose=ep.start, poses=[ep.start])
    if in_view(grid, ep.start, ep.target, sensor):
        state.terminated = True
        state.reason = Reason.SUCCESS
    return state, observe(grid, state, ep.target, sensor)


def reward_terms(
    prev: EnvState,
    next_state: EnvState,
    target: WorldPoint,
    g_opt: WorldPoint,
    cfg: RewardConfig = RewardConfig(),
) -> dict[str, float]:
    """Dense reward components for the transition prev -> next_state,
    evaluated at the post-step pose."""
    if not next_state.poses or next_state.poses[-1] != next_state.pose:
        raise MissingHistory("next state's pose history is inconsistent")
    pose = next_state.pose
    vx = target[0] - pose.x
    vy = target[1] - pose.y
    norm = math.sqrt(vx * vx + vy * vy)
    if norm > 0.0:
        align = (vx * math.cos(pose.theta) + vy * math.sin(pose.theta)) / norm
    else:
        align = 0.0
    orient = cfg.orient_positive_scale * align if align > 0.0 else align

    prev_pose = prev.pose
    d_prev = math.hypot(prev_pose.x - g_opt[0], prev_pose.y - g_opt[1])
    d_next = math.hypot(pose.x - g_opt[0], pose.y - g_opt[1])
    nav = cfg.nav_scale * (d_prev - d_next)

    move = 0.0
    history = next_state.poses
    if len(history) >= cfg.move_window + 1:
        largest = max(
            math.hypot(pose.x - p.x, pose.y - p.y)
            for p in history[-(cfg.move_window + 1) : -1]
        )
        if largest < cfg.move_threshold:
            move = cfg.move_penalty

    return {"orient": orient, "nav": nav, "move": move, "exp": cfg.step_penalty}


def compute_reward(
    prev: EnvState,
    next_state: EnvState,
    reason: Reason,
    target: WorldPoint,
    g_opt: WorldPoint,
    cfg: RewardConfig = RewardConfig(),
) -> float:
    """Terminal rewards replace the dense sum: +10 on success, -10 on
    collision or timeout; otherwise orient + nav + move + step terms."""
    if reason is Reason.SUCCESS:
        return cfg.success_reward
    if reason in (Reason.COLLISION, Reason.TIMEOUT):
        return cfg.failure_penalty
    terms = reward_terms(prev, next_state, target, g_opt, cfg)
    return terms["orient"] + terms["nav"] + terms["move"] + terms["exp"]


def step(
    grid: GridMap,
    inflated: GridMap,
    state: EnvState,
    action: Action,
    ep: EpisodeSpec,
    mode: CollisionMode = CollisionMode.SLIDE,
    *,
    sensor: SensorConfig = SensorConfig(),
    motion: MotionConfig = MotionConfig(),
    reward_cfg: RewardConfig = RewardConfig(),
) -> StepOutcome:
    """Advance one step: apply the action against the inflated map, update
    histories and the traveled length, then resolve termination (collision
    only ends the episode in STRICT mode) and the reward."""
    if state.terminated:
        raise SteppingTerminatedEpisode(f"episode already ended: {state.reason.value}")
    prev = replace(state, poses=list(state.poses), actions=deque(state.actions, maxlen=3))
    new_pose, collided = step_pose(inflated, state.pose, action, motion, mode)
    state.path_length += math.hypot(new_pose.x - state.pose.x, new_pose.y - state.pose.y)
    state.pose = new_pose
    state.poses.append(new_pose)
    state.actions.appendleft(action)
    state.k += 1

    if mode is CollisionMode.STRICT and collided:
        reason = Reason.COLLISION
    elif in_view(grid, new_pose, ep.target, sensor):
        reason = Reason.SUCCESS
    elif state.k >= reward_cfg.max_steps:
        reason = Reason.TIMEOUT
    else:
        reason = Reason.RUNNING
    state.reason = reason
    state.terminated = reason is not Reason.RUNNING

    reward = compute_reward(prev, state, reason, ep.target, ep.goal_point, reward_cfg)
    obs = observe(grid, state, ep.target, sensor)
    return StepOutcome(obs, reward, state.terminated, reason, collided)


class InspectionEnv:
    """Convenience wrapper bundling one episode with its maps and configs."""

    def __init__(
        self,
        grid: GridMap,
        episode: EpisodeSpec,
        *,
        mode: CollisionMode = CollisionMode.SLIDE,
        sensor: SensorConfig = SensorConfig(),
        motion: MotionConfig = MotionConfig(),
        reward: RewardConfig = RewardConfig(),
        inflate_radius: float = DEFAULT_AGENT_RADIUS,
        inflated: GridMap | None = None,
    ):
        self.grid = grid
        self.inflated = inflated if inflated is not None else inflate(grid, inflate_radius)
        self.episode = episode
        self.mode = mode
        self.sensor = sensor
        self.motion = motion
        self.reward = reward
        if not is_free(self.inflated, episode.start.position):
            raise InvalidEpisode("episode start pose is not traversable on this map")
        self.state: EnvState | None = None

    def reset(self) -> Observation:
        self.state, obs = reset(self.grid, self.episode, sensor=self.sensor)
        return obs

    def step(self, action: Action) -> StepOutcome:
        if self.state is None:
            raise SteppingTerminatedEpisode("call reset() before step()")
        return step(
            self.grid,
            self.inflated,
            self.state,
            action,
            self.episode,
            self.mode,
            sensor=self.sensor,
            motion=self.motion,
            reward_cfg=self.reward,
        )


# ---------------------------------------------------------------------------
# Episode file I/O (JSON Lines, stable key order)


def _episode_record(ep: EpisodeSpec) -> dict:
    return {
        "type": "episode",
        "id": ep.id,
        "map": ep.map_path,
        "start": [ep.start.x, ep.start.y, ep.start.theta],
        "target": [ep.target.x, ep.target.y],
        "seed": ep.seed,
        "oracle_length_m": ep.oracle_length_m,
        "goal_cell": [ep.goal_cell.col, ep.goal_cell.row],
        "goal_point": [ep.goal_point.x, ep.goal_point.y],
    }


def save_episodes(path, episodes, config: dict | None = None) -> None:
    lines = []
    if config is not None:
        lines.append(json.dumps({"type": "config", **config}))
    lines.extend(json.dumps(_episode_record(ep)) for ep in episodes)
    FsPath(path).write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def load_episodes(path) -> tuple[dict | None, list[EpisodeSpec]]:
    """Returns (config-or-None, episodes). Map paths are kept as written;
    resolve them against the episode file's directory."""
    config = None
    episodes = []
    for line in FsPath(path).read_text(encoding="ascii").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec.get("type") == "config":
            config = {k: v for k, v in rec.items() if k != "type"}
            continue
        episodes.append(
            EpisodeSpec(
                id=int(rec["id"]),
                map_path=rec["map"],
                start=Pose(*rec["start"]),
                target=WorldPoint(*rec["target"]),
                seed=int(rec["seed"]),
                oracle_length_m=float(rec["oracle_length_m"]),
                goal_cell=GridIndex(*rec["goal_cell"]),
                goal_point=WorldPoint(*rec["goal_point"]),
            )
        )
    return config, episodes
