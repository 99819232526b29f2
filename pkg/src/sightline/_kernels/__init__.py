"""Geometry and search kernels with backend selection at import time.

The compiled extension (``_core``, built from Cython) is preferred; the
pure-Python module (``_pure``) is the reference implementation and the
fallback when the extension is unavailable. Both expose the same functions
with bit-identical behavior.

Set ``SIGHTLINE_KERNELS=pure`` or ``SIGHTLINE_KERNELS=compiled`` to force a
backend (the latter raises if the extension is missing).
"""
from __future__ import annotations

import os

_requested = os.environ.get("SIGHTLINE_KERNELS", "auto").strip().lower()

if _requested in ("auto", "", "compiled", "c"):
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        if _requested in ("compiled", "c"):
            raise
        from . import _pure as _impl

        BACKEND = "pure"
elif _requested in ("pure", "py", "python"):
    from . import _pure as _impl

    BACKEND = "pure"
else:
    raise ImportError(
        f"unknown SIGHTLINE_KERNELS value {_requested!r}; "
        "expected 'auto', 'compiled', or 'pure'"
    )

SQRT2 = _impl.SQRT2
NO_HIT = _impl.NO_HIT
ray_first_hit = _impl.ray_first_hit
segment_first_hit = _impl.segment_first_hit
cast_scan = _impl.cast_scan
cell_visible = _impl.cell_visible
visibility_mask = _impl.visibility_mask
astar_octile = _impl.astar_octile

__all__ = [
    "BACKEND",
    "SQRT2",
    "NO_HIT",
    "ray_first_hit",
    "segment_first_hit",
    "cast_scan",
    "cell_visible",
    "visibility_mask",
    "astar_octile",
]
