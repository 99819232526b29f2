"""Raster rendering of maps, vantage sets, planned paths, and trajectories.

Free space is gray, obstacles white, vantage cells light blue, the shortest
path to visibility purple, and the navigation path orange up to its first
cell with target visibility and pink after it. World y points up, so grid
row 0 is the bottom pixel row. Output bytes are deterministic for fixed
inputs.
"""
from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw

from .dynamics import Pose
from .grid import FREE, GridMap, Path, WorldPoint

COLOR_FREE = (205, 205, 205)
COLOR_OCCUPIED = (255, 255, 255)
COLOR_GOAL = (168, 216, 238)
COLOR_INSPECTION = (128, 0, 160)
COLOR_NAV_BEFORE = (255, 150, 40)
COLOR_NAV_AFTER = (244, 114, 182)
COLOR_TRAJECTORY = (32, 128, 48)
COLOR_START = (0, 0, 0)
COLOR_TARGET = (208, 32, 32)


def _paint_cells(img: np.ndarray, grid: GridMap, cells, color) -> None:
    for cell in cells:
        img[grid.height - 1 - cell[1], cell[0]] = color


def render_scene(
    grid: GridMap,
    *,
    goal_mask: np.ndarray | None = None,
    inspection_path: Path | None = None,
    nav_path: Path | None = None,
    nav_split: int | None = None,
    trajectory: list[Pose] | None = None,
    start: WorldPoint | None = None,
    target: WorldPoint | None = None,
    scale: int = 4,
) -> np.ndarray:
    """Compose the scene into an RGB uint8 array of shape
    (height*scale, width*scale, 3).

    ``nav_split`` is the index of the navigation path's first cell with
    target visibility; cells before it are drawn in the pre-visibility
    color, the rest in the post-visibility color.
    """
    img = np.empty((grid.height, grid.width, 3), dtype=np.uint8)
    flipped_free = grid.cells[::-1] == FREE
    img[flipped_free] = COLOR_FREE
    img[~flipped_free] = COLOR_OCCUPIED
    if goal_mask is not None:
        rows, cols = np.nonzero(goal_mask)
        img[grid.height - 1 - rows, cols] = COLOR_GOAL
    if nav_path is not None:
        split = len(nav_path.cells) if nav_split is None else nav_split
        _paint_cells(img, grid, nav_path.cells[:split], COLOR_NAV_BEFORE)
        _paint_cells(img, grid, nav_path.cells[split:], COLOR_NAV_AFTER)
    if inspection_path is not None:
        _paint_cells(img, grid, inspection_path.cells, COLOR_INSPECTION)
    if start is not None:
        _paint_cells(img, grid, [_cell_of(grid, start)], COLOR_START)
    if target is not None:
        _paint_cells(img, grid, [_cell_of(grid, target)], COLOR_TARGET)

    out = np.repeat(np.repeat(img, scale, axis=0), scale, axis=1)
    if trajectory:
        pil = Image.fromarray(out)
        draw = ImageDraw.Draw(pil)
        points = [_to_pixel(grid, p, scale) for p in trajectory]
        if len(points) > 1:
            draw.line(points, fill=COLOR_TRAJECTORY, width=max(1, scale // 2))
        else:
            draw.point(points, fill=COLOR_TRAJECTORY)
        out = np.asarray(pil)
    return out


def _cell_of(grid: GridMap, point: WorldPoint):
    col = min(max(int(point[0] / grid.resolution), 0), grid.width - 1)
    row = min(max(int(point[1] / grid.resolution), 0), grid.height - 1)
    return (col, row)


def _to_pixel(grid: GridMap, pose: Pose, scale: int) -> tuple[float, float]:
    px = pose.x / grid.resolution * scale
    py = (grid.height - pose.y / grid.resolution) * scale
    return (px, py)


def save_png(image: np.ndarray, path) -> None:
    Image.fromarray(image).save(path, format="PNG")
