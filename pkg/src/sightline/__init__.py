"""Simulator, ground-truth planner, and evaluation harness for
visibility-seeking inspection navigation on 2D occupancy grids.

The task: starting from a pose, reach any cell from which a designated
target point is observable (within sensor range, line of sight clear), as
cheaply as possible. The package provides the grid world, depth sensing,
the exact shortest-path-to-visibility computation, a step/reset
environment with shaped rewards, scripted reference policies, and SR/SPL
evaluation.
"""
from ._kernels import BACKEND as KERNEL_BACKEND
from .dynamics import Action, CollisionMode, MotionConfig, Pose
from .env import (
    EpisodeSpec,
    InspectionEnv,
    Observation,
    Reason,
    RewardConfig,
    SamplerConfig,
    sample_episode,
)
from .evaluate import EvalRecord, Report, evaluate, run_episode, spl, success_rate
from .grid import (
    GridIndex,
    GridMap,
    MapGenSpec,
    Path,
    WorldPoint,
    generate_map,
    geodesic_distance,
    inflate,
    is_free,
    load_map,
    save_map,
    segment_free,
)
from .oracle import (
    GoalSet,
    OracleResult,
    candidate_goal_set,
    navigation_visibility_prefix,
    shortest_inspection_path,
    shortest_navigation_path,
)
from .policies import POLICY_NAMES, make_policy
from .sensor import DepthScan, SensorConfig, cast_ray, in_view, render_depth, visible_from

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "Action",
    "CollisionMode",
    "MotionConfig",
    "Pose",
    "EpisodeSpec",
    "InspectionEnv",
    "Observation",
    "Reason",
    "RewardConfig",
    "SamplerConfig",
    "sample_episode",
    "EvalRecord",
    "Report",
    "evaluate",
    "run_episode",
    "spl",
    "success_rate",
    "GridIndex",
    "GridMap",
    "MapGenSpec",
    "Path",
    "WorldPoint",
    "generate_map",
    "geodesic_distance",
    "inflate",
    "is_free",
    "load_map",
    "save_map",
    "segment_free",
    "GoalSet",
    "OracleResult",
    "candidate_goal_set",
    "navigation_visibility_prefix",
    "shortest_inspection_path",
    "shortest_navigation_path",
    "POLICY_NAMES",
    "make_policy",
    "DepthScan",
    "SensorConfig",
    "cast_ray",
    "in_view",
    "render_depth",
    "visible_from",
]
