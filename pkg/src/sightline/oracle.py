"""Ground-truth planning: the candidate vantage set for a target, the
shortest path to visibility, and the navigation-path references used by the
evaluation harness.

Searches run on the inflated grid (the agent's traversable space) while
sight lines are cast on the physical grid, so a target may legally sit on an
obstacle face. Pass ``inflated=`` to reuse a precomputed inflated map;
otherwise it is derived with :data:`sightline.grid.DEFAULT_AGENT_RADIUS`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import ndimage

from . import _kernels
from .errors import GoalOccupied, NoInspectionPoint, StartOccupied, Unreachable
from .grid import (
    DEFAULT_AGENT_RADIUS,
    FREE,
    GridIndex,
    GridMap,
    Path,
    WorldPoint,
    _euclid_field,
    grid_to_world,
    inflate,
    path_length_m,
)
from .sensor import visibility_mask


@dataclass(frozen=True, eq=False)
class GoalSet:
    """Cells satisfying all three vantage constraints: traversable (in the
    inflated map), within sensor range of the target, and with a clear sight
    line to it."""

    mask: np.ndarray = field(repr=False)
    target: WorldPoint
    max_range: float

    @cached_property
    def cells(self) -> frozenset[GridIndex]:
        return frozenset(
            GridIndex(int(c), int(r)) for r, c in np.argwhere(self.mask)
        )

    def __len__(self) -> int:
        return int(np.count_nonzero(self.mask))

    def __contains__(self, cell: GridIndex) -> bool:
        col, row = cell
        if not (0 <= row < self.mask.shape[0] and 0 <= col < self.mask.shape[1]):
            return False
        return bool(self.mask[row, col])


@dataclass(frozen=True)
class OracleResult:
    """Shortest path to visibility; ``goal`` is its final cell and
    ``goal_point`` that cell's center."""

    inspection_path: Path
    goal: GridIndex
    goal_point: WorldPoint

    @property
    def length(self) -> float:
        return self.inspection_path.length


def _resolve_inflated(grid: GridMap, inflated: GridMap | None) -> GridMap:
    return inflated if inflated is not None else inflate(grid, DEFAULT_AGENT_RADIUS)


def candidate_goal_set(
    grid: GridMap,
    target: WorldPoint,
    max_range: float,
    *,
    inflated: GridMap | None = None,
) -> GoalSet:
    """All vantage cells for a target; may be empty."""
    infl = _resolve_inflated(grid, inflated)
    vis = visibility_mask(grid, target, max_range)
    mask = (vis != 0) & (infl.cells == FREE)
    return GoalSet(mask, WorldPoint(*target), max_range)


def _snap_start(grid: GridMap, infl: GridMap, start: WorldPoint) -> GridIndex:
    col = math.floor(start[0] / grid.resolution)
    row = math.floor(start[1] / grid.resolution)
    cell = GridIndex(col, row)
    if not infl.cell_free(cell):
        raise StartOccupied(f"start {tuple(start)} is not in traversable space")
    return cell


def _path_from_cells(resolution: float, cells: np.ndarray, na: int, nd: int) -> Path:
    return Path(
        tuple(GridIndex(int(c), int(r)) for c, r in cells),
        path_length_m(resolution, na, nd),
    )


def shortest_inspection_path(
    grid: GridMap,
    start: WorldPoint,
    target: WorldPoint,
    max_range: float,
    *,
    inflated: GridMap | None = None,
) -> OracleResult:
    """Minimal-cost 8-connected path from the start's cell to any vantage
    cell, by A* with the Euclidean nearest-goal heuristic (computed as an
    exact distance transform over the goal mask).

    Raises NoInspectionPoint when the goal set is empty, Unreachable when it
    is disconnected from the start, StartOccupied for an invalid start.
    """
    infl = _resolve_inflated(grid, inflated)
    start_cell = _snap_start(grid, infl, start)
    goals = candidate_goal_set(grid, target, max_range, inflated=infl)
    if len(goals) == 0:
        raise NoInspectionPoint(f"no traversable cell can observe {tuple(target)}")
    hfield = ndimage.distance_transform_edt(~goals.mask)
    result = _kernels.astar_octile(
        infl.cells,
        start_cell.col,
        start_cell.row,
        goals.mask.astype(np.uint8),
        np.ascontiguousarray(hfield, dtype=np.float64),
    )
    if result is None:
        raise Unreachable(f"vantage cells exist but none is reachable from {tuple(start)}")
    cells, na, nd = result
    path = _path_from_cells(grid.resolution, cells, na, nd)
    goal = path.cells[-1]
    return OracleResult(path, goal, grid_to_world(grid, goal))


def shortest_navigation_path(
    grid: GridMap,
    start: WorldPoint,
    goal: WorldPoint,
    *,
    inflated: GridMap | None = None,
) -> Path:
    """Cost-minimal 8-connected path between the cells containing two
    points, on the inflated map."""
    infl = _resolve_inflated(grid, inflated)
    start_cell = _snap_start(grid, infl, start)
    goal_col = math.floor(goal[0] / grid.resolution)
    goal_row = math.floor(goal[1] / grid.resolution)
    goal_cell = GridIndex(goal_col, goal_row)
    if not infl.cell_free(goal_cell):
        raise GoalOccupied(f"goal {tuple(goal)} is not in traversable space")
    goal_mask = np.zeros((grid.height, grid.width), dtype=np.uint8)
    goal_mask[goal_cell.row, goal_cell.col] = 1
    hfield = _euclid_field(grid, goal_cell)
    result = _kernels.astar_octile(
        infl.cells, start_cell.col, start_cell.row, goal_mask, hfield
    )
    if result is None:
        raise Unreachable(f"no path from {tuple(start)} to {tuple(goal)}")
    cells, na, nd = result
    return _path_from_cells(grid.resolution, cells, na, nd)


def navigation_visibility_prefix(
    grid: GridMap,
    nav_path: Path,
    target: WorldPoint,
    max_range: float,
) -> float:
    """Length walked along a navigation path up to (inclusive) its first
    cell that observes the target; ``math.inf`` when no cell on the path
    does. Sight lines use the physical grid, matching the vantage-set
    definition."""
    from .sensor import visible_from

    na = 0
    nd = 0
    prev: GridIndex | None = None
    for cell in nav_path.cells:
        if prev is not None:
            if cell.col != prev.col and cell.row != prev.row:
                nd += 1
            else:
                na += 1
        if visible_from(grid, cell, target, max_range):
            return path_length_m(grid.resolution, na, nd)
        prev = cell
    return math.inf
