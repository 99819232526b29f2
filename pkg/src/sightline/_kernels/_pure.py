"""Pure-Python implementations of the geometry and search kernels.

This module defines the reference semantics for the compiled backend
(``sightline._kernels._core``); the two must produce bit-identical results
and are cross-checked by the parity tests and ``benchmarks/bench_kernels.py``.
Hot loops here run over scalar Python floats, so expect one to two orders of
magnitude less throughput than the compiled module.

Conventions shared by every kernel:

* occupancy arrays are uint8, shape (height, width), 0 = free, nonzero =
  occupied, indexed [row, col];
* a point belongs to cell (floor(x/res), floor(y/res)); everything outside
  the grid counts as occupied;
* grid searches work in cell units with axis cost 1 and diagonal cost
  sqrt(2), and path lengths are derived from integer step counts so that two
  independent searches of the same instance produce bit-identical costs.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)

#: Sentinel returned by :func:`segment_first_hit` when the segment is clear.
NO_HIT = 2.0

# Neighbor order is part of the deterministic contract shared with the
# compiled backend: row-major over (drow, dcol).
_NEIGHBORS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


def ray_first_hit(occ, resolution, ox, oy, angle, max_dist):
    """Distance along a ray to the first occupied or out-of-grid cell.

    Returns ``max_dist`` when nothing blocks the ray within range, and 0.0
    when the origin cell itself is occupied. Boundary crossings are computed
    exactly from integer cell indices, so there is no accumulation drift. A
    ray passing exactly through a lattice corner steps diagonally; the two
    cells merely touched at the corner instant are not entered.
    """
    height, width = occ.shape
    dx = math.cos(angle)
    dy = math.sin(angle)
    col = math.floor(ox / resolution)
    row = math.floor(oy / resolution)
    if col < 0 or row < 0 or col >= width or row >= height or occ[row, col]:
        return 0.0
    if dx > 0.0:
        sx, bx = 1, col + 1
    elif dx < 0.0:
        sx, bx = -1, col
    else:
        sx, bx = 0, 0
    if dy > 0.0:
        sy, by = 1, row + 1
    elif dy < 0.0:
        sy, by = -1, row
    else:
        sy, by = 0, 0
    while True:
        tx = (bx * resolution - ox) / dx if sx else math.inf
        ty = (by * resolution - oy) / dy if sy else math.inf
        t = tx if tx < ty else ty
        if t >= max_dist:
            return max_dist
        if tx <= ty:
            col += sx
            bx += sx
        if ty <= tx:
            row += sy
            by += sy
        if col < 0 or row < 0 or col >= width or row >= height or occ[row, col]:
            return t if t > 0.0 else 0.0


def segment_first_hit(occ, resolution, x0, y0, x1, y1):
    """Earliest parameter t in [0, 1] at which the segment stands in an
    occupied or out-of-grid cell; ``NO_HIT`` (2.0) when every touched cell is
    free.

    Exact cell-boundary crossing traversal (no sampling gaps). The endpoint
    is included: a segment ending exactly on the near face of an occupied
    cell reports a hit at t = 1.
    """
    height, width = occ.shape
    col = math.floor(x0 / resolution)
    row = math.floor(y0 / resolution)
    if col < 0 or row < 0 or col >= width or row >= height or occ[row, col]:
        return 0.0
    end_col = math.floor(x1 / resolution)
    end_row = math.floor(y1 / resolution)
    if col == end_col and row == end_row:
        return NO_HIT
    dx = x1 - x0
    dy = y1 - y0
    if dx > 0.0:
        sx, bx = 1, col + 1
    elif dx < 0.0:
        sx, bx = -1, col
    else:
        sx, bx = 0, 0
    if dy > 0.0:
        sy, by = 1, row + 1
    elif dy < 0.0:
        sy, by = -1, row
    else:
        sy, by = 0, 0
    while True:
        tx = (bx * resolution - x0) / dx if sx else math.inf
        ty = (by * resolution - y0) / dy if sy else math.inf
        t = tx if tx < ty else ty
        if t > 1.0:
            return NO_HIT
        if tx <= ty:
            col += sx
            bx += sx
        if ty <= tx:
            row += sy
            by += sy
        if col < 0 or row < 0 or col >= width or row >= height or occ[row, col]:
            return t if t > 0.0 else 0.0
        if col == end_col and row == end_row:
            return NO_HIT


def cast_scan(occ, resolution, ox, oy, angles, max_dist):
    """Vector of :func:`ray_first_hit` results, one per angle."""
    out = np.empty(len(angles), dtype=np.float64)
    for i in range(len(angles)):
        out[i] = ray_first_hit(occ, resolution, ox, oy, float(angles[i]), max_dist)
    return out


def cell_visible(occ, resolution, col, row, tx, ty, max_range, min_dist):
    """Line-of-sight test from the center of cell (col, row) to a point.

    True when the cell is free, the target distance d from the cell center
    satisfies min_dist < d <= max_range, and no occupied cell starts strictly
    closer than the target along the sight line. A hit exactly at the target
    (a point sitting on an obstacle face) does not occlude.
    """
    height, width = occ.shape
    if col < 0 or row < 0 or col >= width or row >= height or occ[row, col]:
        return False
    cx = (col + 0.5) * resolution
    cy = (row + 0.5) * resolution
    ddx = tx - cx
    ddy = ty - cy
    d = math.sqrt(ddx * ddx + ddy * ddy)
    if d <= min_dist or d > max_range:
        return False
    return segment_first_hit(occ, resolution, cx, cy, tx, ty) >= 1.0


def visibility_mask(occ, resolution, tx, ty, max_range, min_dist):
    """uint8 mask of all cells whose centers have line of sight to the target
    within (min_dist, max_range]."""
    height, width = occ.shape
    out = np.zeros((height, width), dtype=np.uint8)
    for row in range(height):
        for col in range(width):
            if cell_visible(occ, resolution, col, row, tx, ty, max_range, min_dist):
                out[row, col] = 1
    return out


def astar_octile(occ, start_col, start_row, goal_mask, hfield):
    """A* over the 8-connected grid in cell units.

    Axis steps cost 1, diagonal steps cost sqrt(2), and a diagonal step
    requires both adjacent axis cells to be free (no corner cutting).
    ``hfield`` supplies an admissible per-cell heuristic in cell units.
    Ties break on (f, h, row-major index), which pins the expansion order,
    hence the returned path, across backends.

    Returns ``(cells, axis_steps, diag_steps)`` where ``cells`` is an int32
    array of (col, row) pairs from start to the first expanded goal cell, or
    ``None`` when no goal cell is reachable. Costs are carried as integer
    step counts; callers derive metric lengths from them.
    """
    height, width = occ.shape
    if occ[start_row, start_col]:
        return None
    n = height * width
    start = start_row * width + start_col
    g = [math.inf] * n
    na = [0] * n
    nd = [0] * n
    came = [-1] * n
    closed = bytearray(n)
    h0 = float(hfield[start_row, start_col])
    g[start] = 0.0
    heap = [(h0, h0, start)]
    while heap:
        f, hh, idx = heapq.heappop(heap)
        if closed[idx]:
            continue
        closed[idx] = 1
        row, col = divmod(idx, width)
        if goal_mask[row, col]:
            path = []
            i = idx
            while i != -1:
                r, c = divmod(i, width)
                path.append((c, r))
                i = came[i]
            path.reverse()
            return np.array(path, dtype=np.int32), na[idx], nd[idx]
        nai = na[idx]
        ndi = nd[idx]
        for dr, dc in _NEIGHBORS:
            nr = row + dr
            nc = col + dc
            if nr < 0 or nc < 0 or nr >= height or nc >= width:
                continue
            if occ[nr, nc]:
                continue
            if dr != 0 and dc != 0:
                if occ[row, nc] or occ[nr, col]:
                    continue
                na2 = nai
                nd2 = ndi + 1
            else:
                na2 = nai + 1
                nd2 = ndi
            g2 = na2 + nd2 * SQRT2
            j = nr * width + nc
            if g2 < g[j]:
                g[j] = g2
                na[j] = na2
                nd[j] = nd2
                came[j] = idx
                hv = float(hfield[nr, nc])
                heapq.heappush(heap, (g2 + hv, hv, j))
    return None
