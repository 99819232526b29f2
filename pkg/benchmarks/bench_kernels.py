#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times the four hot operations (depth scan, whole-grid visibility mask,
multi-goal A*, segment traversal) on a generated map, checks that both
backends return identical results, and prints a speedup table.

Usage: python benchmarks/bench_kernels.py [--size 200] [--repeat 5]
"""
import argparse
import math
import time

import numpy as np

import sightline._kernels._pure as pure
from sightline.grid import MapGenSpec, generate_map, grid_to_world, inflate
from sightline.oracle import candidate_goal_set

try:
    import sightline._kernels._core as core
except ImportError:
    core = None


def timeit(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=200, help="map side, cells")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeat", type=int, default=5, help="best-of repetitions")
    args = parser.parse_args()

    if core is None:
        raise SystemExit(
            "compiled kernels unavailable; build them first "
            "(pip install -e . --no-build-isolation)"
        )

    grid = generate_map(MapGenSpec(width=args.size, height=args.size, seed=args.seed))
    infl = inflate(grid, 0.18)
    occ = grid.cells
    res = grid.resolution
    rng = np.random.default_rng(args.seed)
    free = np.argwhere(infl.cells == 0)
    srow, scol = free[int(rng.integers(len(free)))]
    trow, tcol = free[int(rng.integers(len(free)))]
    origin = grid_to_world(grid, (int(scol), int(srow)))
    target = grid_to_world(grid, (int(tcol), int(trow)))
    angles = np.linspace(-math.pi, math.pi, 64, endpoint=False)
    goals = candidate_goal_set(grid, target, 5.0, inflated=infl)
    goal_mask = goals.mask.astype(np.uint8)
    from scipy import ndimage

    hfield = np.ascontiguousarray(ndimage.distance_transform_edt(~goals.mask))

    segments = rng.uniform(0, args.size * res, size=(2000, 4))

    def bench_scan(mod):
        return lambda: mod.cast_scan(occ, res, origin.x, origin.y, angles, 5.0)

    def bench_mask(mod):
        return lambda: mod.visibility_mask(occ, res, target.x, target.y, 5.0, res / 2)

    def bench_astar(mod):
        return lambda: mod.astar_octile(infl.cells, int(scol), int(srow), goal_mask, hfield)

    def bench_segments(mod):
        def run():
            out = np.empty(len(segments))
            for i, (x0, y0, x1, y1) in enumerate(segments):
                out[i] = mod.segment_first_hit(occ, res, x0, y0, x1, y1)
            return out

        return run

    cases = [
        ("cast_scan (64 rays)", bench_scan),
        ("visibility_mask (full grid)", bench_mask),
        ("astar_octile (multi-goal)", bench_astar),
        ("segment_first_hit (x2000)", bench_segments),
    ]

    print(f"map {args.size}x{args.size}, seed {args.seed}, best of {args.repeat}\n")
    print(f"{'kernel':<30} {'pure':>12} {'compiled':>12} {'speedup':>9}")
    for name, make in cases:
        t_pure, r_pure = timeit(make(pure), args.repeat)
        t_core, r_core = timeit(make(core), args.repeat)
        if isinstance(r_pure, tuple):
            assert np.array_equal(r_pure[0], r_core[0]) and r_pure[1:] == r_core[1:]
        else:
            assert np.array_equal(r_pure, r_core), f"{name}: backend mismatch"
        print(f"{name:<30} {t_pure * 1e3:>10.2f}ms {t_core * 1e3:>10.2f}ms {t_pure / t_core:>8.1f}x")


if __name__ == "__main__":
    main()
