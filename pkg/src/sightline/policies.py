"""Pluggable policy interface, scripted baselines, and the two privileged
reference agents (navigation-path follower and inspection-path follower).

Policies declared ``privileged`` additionally receive the maps and episode
at reset and the live environment state in ``act``; the others must work
from the observation alone.
"""
from __future__ import annotations

import math

from .dynamics import Action, MotionConfig, Pose, wrap_angle
from .env import EnvState, EpisodeSpec, Observation
from .errors import UnknownPolicy
from .grid import GridIndex, GridMap, Path, WorldPoint, segment_free
from .oracle import shortest_inspection_path, shortest_navigation_path
from .sensor import SensorConfig, target_bearing


class Policy:
    name = "policy"
    privileged = False

    def reset(
        self,
        grid: GridMap | None = None,
        inflated: GridMap | None = None,
        episode: EpisodeSpec | None = None,
    ) -> None:
        pass

    def act(self, obs: Observation, rng, state: EnvState | None = None) -> Action:
        raise NotImplementedError


class RandomPolicy(Policy):
    """Uniform draws over the action box."""

    name = "random"

    def act(self, obs, rng, state=None):
        return Action(
            float(rng.uniform(0.0, 1.0)),
            float(rng.uniform(0.0, 1.0)),
            float(rng.uniform(-1.0, 1.0)),
        )


class ObstacleAvoider(Policy):
    """Turn-to-target then drive, veering toward open space when the scan
    shows an obstacle ahead."""

    name = "avoider"

    def __init__(
        self,
        sensor: SensorConfig = SensorConfig(),
        motion: MotionConfig = MotionConfig(),
        align_threshold: float = math.pi / 8,
        clearance_m: float = 0.5,
    ):
        self.sensor = sensor
        self.motion = motion
        self.align_threshold = align_threshold
        self.clearance_m = clearance_m

    def act(self, obs, rng, state=None):
        if abs(obs.dtheta) > self.align_threshold:
            phi = min(max(obs.dtheta, -self.motion.phi_max), self.motion.phi_max)
            return Action(1.0, 0.0, phi / self.motion.phi_max)
        depth_m = obs.depth * self.sensor.max_range
        n = len(depth_m)
        central = depth_m[n // 3 : n - n // 3] if n >= 3 else depth_m
        if float(central.min()) > self.clearance_m:
            return Action(0.0, 1.0, 0.0)
        # Scan runs right-to-left (ray 0 at -fov/2), so the upper half is
        # the agent's left side.
        right = float(depth_m[: n // 2].mean()) if n > 1 else float(depth_m[0])
        left = float(depth_m[n - n // 2 :].mean()) if n > 1 else float(depth_m[0])
        return Action(1.0, 0.0, 1.0 if left >= right else -1.0)


def _path_vertices(grid: GridMap, path: Path) -> list[WorldPoint]:
    """Collapse collinear runs of a grid path into its corner points (cell
    centers); preserves the polyline geometry exactly."""
    cells = path.cells
    if len(cells) == 1:
        return [_center(grid, cells[0])]
    verts = [_center(grid, cells[0])]
    prev_dir = (cells[1].col - cells[0].col, cells[1].row - cells[0].row)
    for i in range(1, len(cells) - 1):
        step = (cells[i + 1].col - cells[i].col, cells[i + 1].row - cells[i].row)
        if step != prev_dir:
            verts.append(_center(grid, cells[i]))
            prev_dir = step
    verts.append(_center(grid, cells[-1]))
    return verts


def _center(grid: GridMap, cell: GridIndex) -> WorldPoint:
    return WorldPoint((cell.col + 0.5) * grid.resolution, (cell.row + 0.5) * grid.resolution)


class _PursuitPolicy(Policy):
    """Pure-pursuit waypoint follower shared by the privileged agents.

    Rotations are free under the path-length metric, so the follower
    squares up exactly onto the bearing of the next waypoint before
    translating (it never moves while the bearing error exceeds phi_max/2,
    and in practice moves only once the error is numerically zero; a
    clamped partial turn would otherwise let it drift off its verified
    chord and wedge against inflated corners). Waypoints are the path's
    corner points; one is passed once the agent is within 1.5 cells of it
    and the chord to the next is free, so every position stays on a
    collision-checked chord and every stride is a sub-segment of one.
    """

    privileged = True

    def __init__(self, sensor: SensorConfig = SensorConfig(), motion: MotionConfig = MotionConfig()):
        self.sensor = sensor
        self.motion = motion
        self.grid: GridMap | None = None
        self.inflated: GridMap | None = None
        self.episode: EpisodeSpec | None = None
        self.waypoints: list[WorldPoint] = []
        self.wp = 0

    def _plan(self) -> Path:
        raise NotImplementedError

    def reset(self, grid=None, inflated=None, episode=None):
        self.grid = grid
        self.inflated = inflated
        self.episode = episode
        self.waypoints = _path_vertices(grid, self._plan())
        self.wp = 0

    def _arrived(self, pose: Pose) -> bool:
        last = self.waypoints[-1]
        return (
            math.hypot(pose.x - last.x, pose.y - last.y)
            <= 1.5 * self.grid.resolution
        )

    def _rotate_toward(self, err: float) -> Action:
        phi = min(max(err, -self.motion.phi_max), self.motion.phi_max)
        return Action(1.0, 0.0, phi / self.motion.phi_max)

    def _post_path(self, pose: Pose) -> Action:
        return self._rotate_toward(target_bearing(pose, self.episode.target))

    def act(self, obs, rng, state=None):
        if state is None:
            raise ValueError(f"{self.name} is privileged and needs the env state")
        pose = state.pose
        p = pose.position
        tol = 1.5 * self.grid.resolution
        while self.wp < len(self.waypoints) - 1:
            w = self.waypoints[self.wp]
            if math.hypot(p.x - w.x, p.y - w.y) > tol:
                break
            if not segment_free(self.inflated, p, self.waypoints[self.wp + 1]):
                break
            self.wp += 1
        if self.wp == len(self.waypoints) - 1 and self._arrived(pose):
            return self._post_path(pose)
        w = self.waypoints[self.wp]
        dist = math.hypot(p.x - w.x, p.y - w.y)
        err = wrap_angle(math.atan2(w.y - p.y, w.x - p.x) - pose.theta)
        if abs(err) > 1e-9:
            return self._rotate_toward(err)
        move = min(self.motion.s_max, dist)
        end = WorldPoint(p.x + move * math.cos(pose.theta), p.y + move * math.sin(pose.theta))
        if not segment_free(self.inflated, p, end):
            # Unreachable while strides stay on verified chords; kept as a
            # safety net against floating-point dust at cell corners.
            return self._rotate_toward(err)
        return Action(0.0, move / self.motion.s_max, 0.0)


class GreedyNavigator(_PursuitPolicy):
    """Follows the shortest start-to-target navigation path, ignoring
    visibility; the episode ends whenever the target happens to come into
    view."""

    name = "navigator"

    def _plan(self) -> Path:
        return shortest_navigation_path(
            self.grid, self.episode.start.position, self.episode.target, inflated=self.inflated
        )


class OracleInspector(_PursuitPolicy):
    """Follows the precomputed shortest path to visibility, then turns to
    face the target."""

    name = "inspector"

    def _plan(self) -> Path:
        result = shortest_inspection_path(
            self.grid,
            self.episode.start.position,
            self.episode.target,
            self.sensor.max_range,
            inflated=self.inflated,
        )
        self._goal_cell = result.goal
        return result.inspection_path

    def _arrived(self, pose: Pose) -> bool:
        col = math.floor(pose.x / self.grid.resolution)
        row = math.floor(pose.y / self.grid.resolution)
        return (col, row) == (self._goal_cell.col, self._goal_cell.row)


_POLICIES = {
    RandomPolicy.name: RandomPolicy,
    ObstacleAvoider.name: ObstacleAvoider,
    GreedyNavigator.name: GreedyNavigator,
    OracleInspector.name: OracleInspector,
}

POLICY_NAMES = tuple(sorted(_POLICIES))


def make_policy(
    name: str,
    sensor: SensorConfig = SensorConfig(),
    motion: MotionConfig = MotionConfig(),
) -> Policy:
    try:
        cls = _POLICIES[name.strip().lower()]
    except KeyError:
        raise UnknownPolicy(
            f"unknown policy {name!r}; expected one of: {', '.join(POLICY_NAMES)}"
        )
    if cls is RandomPolicy:
        return cls()
    return cls(sensor=sensor, motion=motion)
