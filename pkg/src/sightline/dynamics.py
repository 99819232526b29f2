"""Agent state, the 3-component action space, and the kinematic step with
its three collision-handling regimes."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

from . import _kernels
from .errors import InvalidStartPose, UnknownMode
from .grid import GridMap, WorldPoint, is_free, segment_first_hit

TWO_PI = 2.0 * math.pi


def wrap_angle(angle: float) -> float:
    """Wrap to [-pi, pi); exactly +pi maps to -pi."""
    return (angle + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class Pose:
    """Planar pose; theta is always stored wrapped to [-pi, pi)."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def position(self) -> WorldPoint:
        return WorldPoint(self.x, self.y)

    @property
    def heading(self) -> tuple[float, float]:
        return (math.cos(self.theta), math.sin(self.theta))


@dataclass(frozen=True)
class Action:
    """Raw policy output: u1 gates forward-vs-rotate, u2 scales translation,
    u3 scales rotation. Components are clamped to their bounds on
    construction; NaN is rejected."""

    u1: float
    u2: float
    u3: float

    def __post_init__(self):
        for name, value in (("u1", self.u1), ("u2", self.u2), ("u3", self.u3)):
            if math.isnan(value):
                raise ValueError(f"action component {name} is NaN")
        object.__setattr__(self, "u1", min(max(self.u1, 0.0), 1.0))
        object.__setattr__(self, "u2", min(max(self.u2, 0.0), 1.0))
        object.__setattr__(self, "u3", min(max(self.u3, -1.0), 1.0))


ZERO_ACTION = Action(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class MotionConfig:
    s_max: float = 0.35
    phi_max: float = math.pi / 4

    def __post_init__(self):
        if self.s_max <= 0 or self.phi_max <= 0:
            raise ValueError("motion limits must be positive")


class Forward(NamedTuple):
    distance: float


class Rotate(NamedTuple):
    angle: float


class CollisionMode(enum.Enum):
    """How a blocked forward move resolves: slide along the wall, stop at
    contact, or fail the episode outright."""

    SLIDE = "slide"
    STOP = "stop"
    STRICT = "strict"

    @classmethod
    def from_name(cls, name: str) -> "CollisionMode":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise UnknownMode(f"unknown collision mode {name!r}; expected one of: {valid}")


def interpret(action: Action, cfg: MotionConfig) -> Forward | Rotate:
    """u1 <= 0.5 selects forward motion scaled by u2; u1 > 0.5 selects
    in-place rotation scaled by u3."""
    if action.u1 <= 0.5:
        return Forward(action.u2 * cfg.s_max)
    return Rotate(action.u3 * cfg.phi_max)


def _slide(grid: GridMap, pose: Pose, vx: float, vy: float) -> Pose:
    """Axis-decomposed slide: execute the larger free single-axis component
    of the blocked displacement (x preferred on ties); no motion if both
    axis moves are blocked."""
    origin = pose.position
    best_mag = 0.0
    best = None
    for dx, dy in ((vx, 0.0), (0.0, vy)):
        mag = abs(dx) + abs(dy)
        if mag <= best_mag:
            continue
        if segment_first_hit(grid, origin, WorldPoint(pose.x + dx, pose.y + dy)) >= _kernels.NO_HIT:
            best_mag = mag
            best = (dx, dy)
    if best is None:
        return pose
    return Pose(pose.x + best[0], pose.y + best[1], pose.theta)


def step_pose(
    grid: GridMap,
    pose: Pose,
    action: Action,
    cfg: MotionConfig = MotionConfig(),
    mode: CollisionMode = CollisionMode.SLIDE,
) -> tuple[Pose, bool]:
    """Apply one action against ``grid`` (normally the inflated map).

    Returns the post-step pose and a collision flag. Rotations never change
    position; forward moves never change heading. The flag is False exactly
    when the full commanded segment was free.
    """
    if not is_free(grid, pose.position):
        raise InvalidStartPose(f"pose ({pose.x}, {pose.y}) is not in a free cell")
    cmd = interpret(action, cfg)
    if isinstance(cmd, Rotate):
        return Pose(pose.x, pose.y, wrap_angle(pose.theta + cmd.angle)), False
    s = cmd.distance
    if s == 0.0:
        return pose, False
    ux = math.cos(pose.theta)
    uy = math.sin(pose.theta)
    target = WorldPoint(pose.x + s * ux, pose.y + s * uy)
    t_hit = segment_first_hit(grid, pose.position, target)
    if t_hit >= _kernels.NO_HIT:
        return Pose(target.x, target.y, pose.theta), False
    if mode is CollisionMode.STRICT:
        return pose, True
    if mode is CollisionMode.STOP:
        # Back off from the contact point so the resulting pose is strictly
        # inside free space.
        advance = t_hit * s - grid.resolution / 10.0
        if advance <= 0.0:
            return pose, True
        return Pose(pose.x + advance * ux, pose.y + advance * uy, pose.theta), True
    return _slide(grid, pose, s * ux, s * uy), True
