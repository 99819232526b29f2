import math

import numpy as np
import pytest

from reference import empty_map, free_cells, grid_from_rows, random_walled_map
from sightline.dynamics import (
    Action,
    CollisionMode,
    Forward,
    MotionConfig,
    Pose,
    Rotate,
    interpret,
    step_pose,
    wrap_angle,
)
from sightline.errors import InvalidStartPose, UnknownMode
from sightline.grid import GridMap, WorldPoint, is_free, segment_free


def test_wrap_angle_convention():
    assert wrap_angle(math.pi) == -math.pi
    assert wrap_angle(-math.pi) == -math.pi
    assert wrap_angle(0.0) == 0.0
    assert wrap_angle(3 * math.pi) == -math.pi
    assert wrap_angle(0.3) == pytest.approx(0.3, abs=1e-15)


def test_pose_wraps_theta():
    assert Pose(0, 0, math.pi).theta == -math.pi
    assert Pose(0, 0, 2 * math.pi + 0.1).theta == pytest.approx(0.1)


def test_action_clamps_out_of_bounds():
    a = Action(1.2, -0.3, -1.7)
    assert (a.u1, a.u2, a.u3) == (1.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        Action(float("nan"), 0, 0)


def test_interpret_examples():
    cfg = MotionConfig()
    assert interpret(Action(0.3, 1.0, 0.7), cfg) == Forward(0.35)
    assert interpret(Action(0.6, 0.4, 1.0), cfg) == Rotate(math.pi / 4)
    assert interpret(Action(0.5, 0.0, 0.0), cfg) == Forward(0.0)  # boundary is forward


def test_rotate_in_place():
    grid = empty_map(40, 40, 0.05)
    pose, collided = step_pose(grid, Pose(0.5, 0.5, 0.0), Action(1.0, 0.0, 1.0))
    assert (pose.x, pose.y) == (0.5, 0.5)
    assert pose.theta == math.pi / 4
    assert not collided


def test_forward_full_step_open_space():
    grid = empty_map(40, 40, 0.05)
    pose, collided = step_pose(grid, Pose(0.5, 0.5, 0.0), Action(0.0, 1.0, 0.0))
    assert pose.x == pytest.approx(0.85, abs=1e-15)
    assert pose.y == 0.5
    assert pose.theta == 0.0
    assert not collided


def wall_ahead_map():
    # wall column at x in [0.6, 0.65): 0.1 m ahead of an agent at x = 0.5
    cells = np.zeros((20, 20), np.uint8)
    cells[:, 12] = 1
    return GridMap(20, 20, 0.05, cells)


def bisect_free_prefix(grid, pose, distance, iters=60):
    """Binary search for the longest free forward prefix (test oracle)."""
    ux, uy = math.cos(pose.theta), math.sin(pose.theta)
    lo, hi = 0.0, distance
    if segment_free(grid, pose.position, WorldPoint(pose.x + distance * ux, pose.y + distance * uy)):
        return distance
    for _ in range(iters):
        mid = (lo + hi) / 2
        if segment_free(grid, pose.position, WorldPoint(pose.x + mid * ux, pose.y + mid * uy)):
            lo = mid
        else:
            hi = mid
    return lo


def test_forward_into_wall_stop_mode():
    grid = wall_ahead_map()
    start = Pose(0.5, 0.5, 0.0)
    pose, collided = step_pose(grid, start, Action(0.0, 1.0, 0.0), mode=CollisionMode.STOP)
    assert collided
    free_prefix = bisect_free_prefix(grid, start, 0.35)
    advanced = pose.x - start.x
    assert free_prefix - grid.resolution / 10 - 1e-9 <= advanced <= free_prefix
    assert is_free(grid, pose.position)
    assert pose.y == start.y and pose.theta == start.theta


def test_forward_into_wall_strict_mode():
    grid = wall_ahead_map()
    start = Pose(0.5, 0.5, 0.0)
    pose, collided = step_pose(grid, start, Action(0.0, 1.0, 0.0), mode=CollisionMode.STRICT)
    assert collided
    assert pose == start


def test_forward_into_wall_slide_mode():
    grid = wall_ahead_map()
    # heading up-right at 60 degrees: x component blocked, y component free
    start = Pose(0.55, 0.5, math.pi / 3)
    pose, collided = step_pose(grid, start, Action(0.0, 1.0, 0.0), mode=CollisionMode.SLIDE)
    assert collided
    vy = 0.35 * math.sin(math.pi / 3)
    assert pose.x == start.x
    assert pose.y == pytest.approx(start.y + vy, abs=1e-12)
    # slide never amplifies motion
    assert math.hypot(pose.x - start.x, pose.y - start.y) <= 0.35 + 1e-12


def test_slide_blocked_both_axes_stays_put():
    grid = grid_from_rows(
        [
            "111",
            "101",
            "111",
        ],
        0.05,
    )
    start = Pose(0.075, 0.075, 0.7)
    pose, collided = step_pose(grid, start, Action(0.0, 1.0, 0.0), mode=CollisionMode.SLIDE)
    assert collided
    assert (pose.x, pose.y) == (start.x, start.y)


def test_step_pose_rejects_occupied_start():
    grid = grid_from_rows(["10"], 0.05)
    with pytest.raises(InvalidStartPose):
        step_pose(grid, Pose(0.025, 0.025, 0.0), Action(0.0, 1.0, 0.0))


def test_collision_mode_names():
    assert CollisionMode.from_name("Slide") is CollisionMode.SLIDE
    with pytest.raises(UnknownMode):
        CollisionMode.from_name("bounce")


def test_step_pose_random_properties(rng):
    cfg = MotionConfig()
    grids = [random_walled_map(rng, width=20, height=20, fill=0.2) for _ in range(5)]
    cells = [free_cells(g) for g in grids]
    for i in range(10_000):
        gi = i % len(grids)
        grid = grids[gi]
        cell = cells[gi][int(rng.integers(len(cells[gi])))]
        pose = Pose(
            (cell.col + 0.5) * 0.05, (cell.row + 0.5) * 0.05, float(rng.uniform(-math.pi, math.pi))
        )
        action = Action(*rng.uniform((0, 0, -1), (1, 1, 1)))
        mode = (CollisionMode.SLIDE, CollisionMode.STOP, CollisionMode.STRICT)[i % 3]
        new_pose, collided = step_pose(grid, pose, action, cfg, mode)
        dp = math.hypot(new_pose.x - pose.x, new_pose.y - pose.y)
        dth = abs(wrap_angle(new_pose.theta - pose.theta))
        assert dp <= cfg.s_max * (1 + 1e-12)
        assert dth <= cfg.phi_max * (1 + 1e-12)
        if action.u1 > 0.5:
            assert (new_pose.x, new_pose.y) == (pose.x, pose.y)
        else:
            assert new_pose.theta == pose.theta
        assert is_free(grid, new_pose.position)
        if mode is CollisionMode.STRICT:
            assert segment_free(grid, pose.position, new_pose.position)
        # determinism
        again, collided2 = step_pose(grid, pose, action, cfg, mode)
        assert again == new_pose and collided2 == collided
