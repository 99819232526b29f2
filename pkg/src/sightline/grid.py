"""Occupancy grids: map type, file I/O, procedural generation, coordinate
transforms, configuration-space inflation, and geodesic distances.

World frame: x grows with columns, y grows with rows, the grid covers
[0, width*resolution) x [0, height*resolution). A point belongs to the cell
(floor(x/res), floor(y/res)); every query outside the grid reports occupied.

Map file format (text, LF newlines, no trailing whitespace):
line 1 is ``"<width> <height> <resolution>"``; lines 2..height+1 hold width
characters each, ``'0'`` free and ``'1'`` occupied, row 0 first. The
canonical form written by :func:`save_map` prints the resolution with
``repr``, i.e. the shortest decimal that round-trips.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from . import _kernels
from .errors import (
    DimensionMismatch,
    GenerationFailed,
    GoalOccupied,
    InvalidCellSymbol,
    MalformedHeader,
    OutOfBounds,
    StartOccupied,
)

FREE = 0
OCCUPIED = 1

#: Grid pitch used by the map generator and the CLI defaults, meters per cell.
DEFAULT_RESOLUTION = 0.05

#: Embodiment radius applied by planners and collision checks, meters.
DEFAULT_AGENT_RADIUS = 0.18


class WorldPoint(NamedTuple):
    x: float
    y: float


class GridIndex(NamedTuple):
    col: int
    row: int


@dataclass(frozen=True, eq=False)
class GridMap:
    """Immutable 2D occupancy grid with a metric resolution.

    ``cells`` is a read-only uint8 array of shape (height, width), indexed
    [row, col], 0 free / 1 occupied.
    """

    width: int
    height: int
    resolution: float
    cells: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid dimensions must be at least 1x1")
        if not (self.resolution > 0 and math.isfinite(self.resolution)):
            raise ValueError("resolution must be positive and finite")
        cells = np.ascontiguousarray(self.cells, dtype=np.uint8)
        if cells.shape != (self.height, self.width):
            raise ValueError("cell array shape does not match declared size")
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)

    def __eq__(self, other):
        if not isinstance(other, GridMap):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.resolution == other.resolution
            and np.array_equal(self.cells, other.cells)
        )

    def contains(self, point: WorldPoint) -> bool:
        return (
            0.0 <= point[0] < self.width * self.resolution
            and 0.0 <= point[1] < self.height * self.resolution
        )

    def in_bounds(self, cell: GridIndex) -> bool:
        return 0 <= cell[0] < self.width and 0 <= cell[1] < self.height

    def cell_free(self, cell: GridIndex) -> bool:
        """Border policy: anything outside the grid is occupied."""
        if not self.in_bounds(cell):
            return False
        return self.cells[cell[1], cell[0]] == FREE

    @property
    def free_fraction(self) -> float:
        return float(np.count_nonzero(self.cells == FREE)) / (self.width * self.height)


@dataclass(frozen=True)
class Path:
    """Ordered 8-connected cell sequence with its metric length.

    The length follows the octile cost model: ``resolution`` per axis step,
    ``resolution * sqrt(2)`` per diagonal step, always computed as
    ``(axis_steps + diag_steps * sqrt(2)) * resolution`` so independent
    searches of one instance agree bit-for-bit.
    """

    cells: tuple[GridIndex, ...]
    length: float


@dataclass(frozen=True)
class MapGenSpec:
    """Parameters for the procedural room-and-corridor generator."""

    width: int = 200
    height: int = 200
    resolution: float = DEFAULT_RESOLUTION
    rooms: int = 6
    obstacle_density: float = 0.08
    corridor_width: int = 16
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.obstacle_density < 1.0:
            raise ValueError("obstacle_density must lie in [0, 1)")
        if self.rooms < 1:
            raise ValueError("rooms must be at least 1")
        if self.corridor_width < 1:
            raise ValueError("corridor_width must be at least 1")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")


def load_map(data: bytes) -> GridMap:
    """Parse a map file. Raises MalformedHeader, DimensionMismatch, or
    InvalidCellSymbol on bad input."""
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as exc:
        raise MalformedHeader("map file is not ASCII text") from exc
    lines = text.split("\n")
    tokens = lines[0].split(" ")
    if len(tokens) != 3:
        raise MalformedHeader(f"expected 'width height resolution', got {lines[0]!r}")
    try:
        width = int(tokens[0])
        height = int(tokens[1])
        resolution = float(tokens[2])
    except ValueError as exc:
        raise MalformedHeader(f"non-numeric header field in {lines[0]!r}") from exc
    if width < 1 or height < 1:
        raise MalformedHeader("declared dimensions must be at least 1x1")
    if not (resolution > 0 and math.isfinite(resolution)):
        raise MalformedHeader("resolution must be positive and finite")
    # A valid file ends with LF after the last row: split() yields one
    # trailing empty string.
    if len(lines) != height + 2 or lines[-1] != "":
        raise DimensionMismatch(
            f"expected {height} rows, found {max(len(lines) - 2, 0)}"
        )
    rows = np.empty((height, width), dtype=np.uint8)
    for r in range(height):
        line = lines[1 + r]
        if len(line) != width:
            raise DimensionMismatch(
                f"row {r} has {len(line)} cells, expected {width}"
            )
        raw = np.frombuffer(line.encode("ascii"), dtype=np.uint8)
        bad = (raw != ord("0")) & (raw != ord("1"))
        if bad.any():
            raise InvalidCellSymbol(
                f"row {r} contains {chr(raw[bad.argmax()])!r}; only '0'/'1' allowed"
            )
        rows[r] = raw - ord("0")
    return GridMap(width, height, resolution, rows)


def save_map(grid: GridMap) -> bytes:
    """Canonical serialization; inverse of :func:`load_map` and
    byte-deterministic for equal maps."""
    out = [f"{grid.width} {grid.height} {grid.resolution!r}"]
    digits = grid.cells + ord("0")
    for r in range(grid.height):
        out.append(digits[r].tobytes().decode("ascii"))
    out.append("")
    return "\n".join(out).encode("ascii")


def world_to_grid(grid: GridMap, point: WorldPoint) -> GridIndex:
    """Cell containing a point (floor convention). Raises OutOfBounds when
    the point lies outside the grid."""
    col = math.floor(point[0] / grid.resolution)
    row = math.floor(point[1] / grid.resolution)
    if not (0 <= col < grid.width and 0 <= row < grid.height):
        raise OutOfBounds(f"point {tuple(point)} lies outside the grid")
    return GridIndex(col, row)


def grid_to_world(grid: GridMap, cell: GridIndex) -> WorldPoint:
    """Metric center of a cell."""
    if not grid.in_bounds(cell):
        raise OutOfBounds(f"cell {tuple(cell)} lies outside the grid")
    return WorldPoint((cell[0] + 0.5) * grid.resolution, (cell[1] + 0.5) * grid.resolution)


def is_free(grid: GridMap, point: WorldPoint) -> bool:
    """True iff the containing cell is in bounds and free."""
    col = math.floor(point[0] / grid.resolution)
    row = math.floor(point[1] / grid.resolution)
    if not (0 <= col < grid.width and 0 <= row < grid.height):
        return False
    return grid.cells[row, col] == FREE


def segment_first_hit(grid: GridMap, p0: WorldPoint, p1: WorldPoint) -> float:
    """Earliest parameter t in [0, 1] at which the segment stands in an
    occupied or out-of-grid cell; ``kernels.NO_HIT`` (2.0) when clear."""
    return _kernels.segment_first_hit(
        grid.cells, grid.resolution, p0[0], p0[1], p1[0], p1[1]
    )


def segment_free(grid: GridMap, p0: WorldPoint, p1: WorldPoint) -> bool:
    """True iff every point of the segment lies in free cells, determined by
    exact cell-boundary crossing traversal."""
    return segment_first_hit(grid, p0, p1) >= _kernels.NO_HIT


def inflate(grid: GridMap, radius: float) -> GridMap:
    """Grow obstacles so that every remaining free cell center lies at least
    ``radius`` (Euclidean) from every occupied cell center of the input.

    Inflation only adds occupancy; radius 0 is the identity.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if radius == 0 or not (grid.cells == OCCUPIED).any():
        return grid
    dist = ndimage.distance_transform_edt(grid.cells == FREE) * grid.resolution
    cells = grid.cells.copy()
    cells[dist < radius] = OCCUPIED
    return GridMap(grid.width, grid.height, grid.resolution, cells)


def _euclid_field(grid: GridMap, cell: GridIndex) -> np.ndarray:
    cols = np.arange(grid.width, dtype=np.float64)[None, :] - cell[0]
    rows = np.arange(grid.height, dtype=np.float64)[:, None] - cell[1]
    return np.sqrt(cols * cols + rows * rows)


def path_length_m(resolution: float, axis_steps: int, diag_steps: int) -> float:
    """Metric length of an octile path from its integer step counts."""
    return (axis_steps + diag_steps * _kernels.SQRT2) * resolution


def geodesic_distance(grid: GridMap, a: GridIndex, b: GridIndex) -> float:
    """Shortest 8-connected path length between two free cells, in meters;
    ``math.inf`` when they are disconnected."""
    if not grid.cell_free(a):
        raise StartOccupied(f"cell {tuple(a)} is occupied or out of bounds")
    if not grid.cell_free(b):
        raise GoalOccupied(f"cell {tuple(b)} is occupied or out of bounds")
    if a == b:
        return 0.0
    goal_mask = np.zeros((grid.height, grid.width), dtype=np.uint8)
    goal_mask[b[1], b[0]] = 1
    hfield = _euclid_field(grid, b)
    result = _kernels.astar_octile(grid.cells, a[0], a[1], goal_mask, hfield)
    if result is None:
        return math.inf
    _, na, nd = result
    return path_length_m(grid.resolution, na, nd)


def largest_free_component(grid: GridMap) -> float:
    """Fraction of all cells covered by the largest 4-connected free region."""
    labels, count = ndimage.label(grid.cells == FREE)
    if count == 0:
        return 0.0
    sizes = np.bincount(labels.ravel())[1:]
    return float(sizes.max()) / (grid.width * grid.height)


def _carve_rect(occ: np.ndarray, x0: int, y0: int, w: int, h: int, value: int) -> None:
    occ[y0 : y0 + h, x0 : x0 + w] = value


def _carve_corridor(occ, a, b, width_cells, rng, interior):
    """L-shaped corridor between two points, horizontal/vertical order drawn
    from the generator stream."""
    half = width_cells // 2
    lo_x, lo_y, hi_x, hi_y = interior

    def hrun(y, x0, x1):
        ys = max(lo_y, y - half)
        ye = min(hi_y, y + (width_cells - half))
        occ[ys:ye, min(x0, x1) : max(x0, x1) + 1] = FREE

    def vrun(x, y0, y1):
        xs = max(lo_x, x - half)
        xe = min(hi_x, x + (width_cells - half))
        occ[min(y0, y1) : max(y0, y1) + 1, xs:xe] = FREE

    if rng.integers(0, 2) == 0:
        hrun(a[1], a[0], b[0])
        vrun(b[0], a[1], b[1])
    else:
        vrun(a[0], a[1], b[1])
        hrun(b[1], a[0], b[0])


def generate_map(spec: MapGenSpec) -> GridMap:
    """Procedural indoor-style map: walled border, rectangular rooms joined
    by corridors, plus small obstacle blocks up to the requested density.

    Deterministic in the seed. Raises GenerationFailed when no layout meets
    the connectivity target (largest free region covering at least 20% of
    all cells, with every room center in it) within a bounded retry budget.
    """
    if spec.width < 20 or spec.height < 20:
        raise ValueError("generated maps must be at least 20x20 cells")
    rng = np.random.default_rng(spec.seed)
    w, h = spec.width, spec.height
    total = w * h
    interior = (1, 1, w - 1, h - 1)
    span = min(w - 2, h - 2)
    if spec.rooms == 1:
        lo = max(spec.corridor_width + 2, int(span * 0.50))
        hi = max(lo + 1, int(span * 0.75))
    else:
        lo = max(spec.corridor_width + 2, int(span * 0.18))
        hi = max(lo + 1, int(span * 0.38))
    gap = 3

    for _ in range(25):
        occ = np.full((h, w), OCCUPIED, dtype=np.uint8)
        rooms: list[tuple[int, int, int, int]] = []
        attempts = 0
        while len(rooms) < spec.rooms and attempts < 60 * spec.rooms:
            attempts += 1
            rw = int(rng.integers(lo, hi + 1))
            rh = int(rng.integers(lo, hi + 1))
            if rw > w - 2 or rh > h - 2:
                continue
            x0 = int(rng.integers(1, w - 1 - rw + 1))
            y0 = int(rng.integers(1, h - 1 - rh + 1))
            if any(
                x0 < ox + ow + gap and ox < x0 + rw + gap
                and y0 < oy + oh + gap and oy < y0 + rh + gap
                for ox, oy, ow, oh in rooms
            ):
                continue
            rooms.append((x0, y0, rw, rh))
        if len(rooms) < spec.rooms:
            continue
        for x0, y0, rw, rh in rooms:
            _carve_rect(occ, x0, y0, rw, rh, FREE)
        centers = [(x0 + rw // 2, y0 + rh // 2) for x0, y0, rw, rh in rooms]
        for i in range(1, len(rooms)):
            dists = [
                (centers[i][0] - centers[j][0]) ** 2 + (centers[i][1] - centers[j][1]) ** 2
                for j in range(i)
            ]
            j = int(np.argmin(dists))
            _carve_corridor(occ, centers[i], centers[j], spec.corridor_width, rng, interior)

        if spec.obstacle_density > 0:
            free_count = int(np.count_nonzero(occ == FREE))
            quota = int(spec.obstacle_density * free_count)
            placed = 0
            block_hi = max(4, span // 20)
            for _ in range(4 * quota + 16):
                if placed >= quota:
                    break
                bw = int(rng.integers(2, block_hi + 1))
                bh = int(rng.integers(2, block_hi + 1))
                x0 = int(rng.integers(1, max(2, w - 1 - bw)))
                y0 = int(rng.integers(1, max(2, h - 1 - bh)))
                patch = occ[y0 : y0 + bh, x0 : x0 + bw]
                placed += int(np.count_nonzero(patch == FREE))
                patch[:] = OCCUPIED

        labels, count = ndimage.label(occ == FREE)
        if count == 0:
            continue
        sizes = np.bincount(labels.ravel())[1:]
        main = int(sizes.argmax()) + 1
        if sizes.max() < 0.20 * total:
            continue
        if any(labels[cy, cx] != main for cx, cy in centers):
            continue
        return GridMap(w, h, spec.resolution, occ)

    raise GenerationFailed(
        f"no layout met the 20% connectivity target for {spec!r}"
    )
