"""Planar depth sensing by ray casting, and the two visibility predicates:
omnidirectional (for planning against cell centers) and field-of-view
constrained (for rollout success)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dynamics import Pose, wrap_angle
from .errors import OriginOccupied
from .grid import GridIndex, GridMap, WorldPoint, is_free


@dataclass(frozen=True)
class SensorConfig:
    """Depth scanner: ``n_rays`` rays evenly spaced across
    [-fov/2, +fov/2] around the heading. Ray 0 points at -fov/2, the last
    ray at +fov/2, and the center ray lies along the heading when n_rays is
    odd."""

    fov: float = math.pi / 2
    n_rays: int = 64
    max_range: float = 5.0

    def __post_init__(self):
        if not 0.0 < self.fov <= 2.0 * math.pi:
            raise ValueError("fov must lie in (0, 2*pi]")
        if self.n_rays < 1:
            raise ValueError("n_rays must be at least 1")
        if self.max_range <= 0:
            raise ValueError("max_range must be positive")

    def ray_angles(self, theta: float) -> np.ndarray:
        if self.n_rays == 1:
            return np.array([theta], dtype=np.float64)
        i = np.arange(self.n_rays, dtype=np.float64)
        return theta + self.fov * (i / (self.n_rays - 1) - 0.5)


@dataclass(frozen=True)
class DepthScan:
    """Per-ray distances in meters; ``max_range`` encodes no hit in range."""

    depths: np.ndarray


def cast_ray(grid: GridMap, origin: WorldPoint, angle: float, max_range: float) -> float:
    """Distance to the first occupied cell boundary along the ray, clipped
    to ``max_range``. Raises OriginOccupied when the origin cell is not
    free."""
    if not is_free(grid, origin):
        raise OriginOccupied(f"ray origin {tuple(origin)} is not in a free cell")
    return _kernels.ray_first_hit(
        grid.cells, grid.resolution, origin[0], origin[1], angle, max_range
    )


def render_depth(grid: GridMap, pose: Pose, cfg: SensorConfig = SensorConfig()) -> DepthScan:
    """Depth scan from a pose; ray i is cast at
    theta + fov * (i/(n_rays-1) - 1/2)."""
    if not is_free(grid, pose.position):
        raise OriginOccupied(f"scan origin ({pose.x}, {pose.y}) is not in a free cell")
    depths = _kernels.cast_scan(
        grid.cells, grid.resolution, pose.x, pose.y, cfg.ray_angles(pose.theta), cfg.max_range
    )
    return DepthScan(depths)


def min_target_distance(grid: GridMap) -> float:
    """Positivity floor for the observability test: the target must lie
    beyond the sensing cell's center neighborhood."""
    return grid.resolution / 2.0


def visible_from(
    grid: GridMap,
    cell: GridIndex,
    target: WorldPoint,
    max_range: float,
    min_dist: float | None = None,
) -> bool:
    """Observability from a cell center, sensor aimed at the target: true
    iff the cell is free, the target distance d satisfies
    min_dist < d <= max_range, and the depth reading along the target's
    bearing is at least d (obstacles strictly nearer occlude; a boundary
    met exactly at the target does not)."""
    if min_dist is None:
        min_dist = min_target_distance(grid)
    return _kernels.cell_visible(
        grid.cells, grid.resolution, cell[0], cell[1], target[0], target[1], max_range, min_dist
    )


def visibility_mask(
    grid: GridMap,
    target: WorldPoint,
    max_range: float,
    min_dist: float | None = None,
) -> np.ndarray:
    """uint8 mask of :func:`visible_from` over every cell of the grid."""
    if min_dist is None:
        min_dist = min_target_distance(grid)
    return _kernels.visibility_mask(
        grid.cells, grid.resolution, target[0], target[1], max_range, min_dist
    )


def target_bearing(pose: Pose, target: WorldPoint) -> float:
    """Bearing error to the target, wrapped to [-pi, pi)."""
    return wrap_angle(math.atan2(target[1] - pose.y, target[0] - pose.x) - pose.theta)


def in_view(grid: GridMap, pose: Pose, target: WorldPoint, cfg: SensorConfig = SensorConfig()) -> bool:
    """Field-of-view constrained visibility at a pose: the bearing error
    must lie within [-fov/2, +fov/2] (inclusive) and :func:`visible_from`
    must hold for the pose's cell."""
    if not is_free(grid, pose.position):
        raise OriginOccupied(f"pose ({pose.x}, {pose.y}) is not in a free cell")
    if abs(target_bearing(pose, target)) > cfg.fov / 2.0:
        return False
    col = math.floor(pose.x / grid.resolution)
    row = math.floor(pose.y / grid.resolution)
    return visible_from(grid, GridIndex(col, row), target, cfg.max_range)
