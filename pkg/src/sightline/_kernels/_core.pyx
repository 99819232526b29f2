# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementations of the geometry and search kernels.

Semantics are defined by ``sightline._kernels._pure``; this module is a
transliteration of it and must produce bit-identical results (covered by the
parity tests). See the pure module for the shared conventions.
"""

from libc.math cimport INFINITY, cos, floor, sin, sqrt
from libc.stdlib cimport free, malloc, realloc

import numpy as np

cimport numpy as cnp

cnp.import_array()

SQRT2 = sqrt(2.0)

NO_HIT = 2.0

cdef double _SQRT2 = sqrt(2.0)
cdef double _NO_HIT = 2.0

# Row-major neighbor order (drow, dcol); part of the deterministic contract.
cdef int[8] _NB_DR = [-1, -1, -1, 0, 0, 1, 1, 1]
cdef int[8] _NB_DC = [-1, 0, 1, -1, 1, -1, 0, 1]


cdef inline bint _occupied(const unsigned char[:, :] occ, long col, long row) nogil:
    if col < 0 or row < 0 or col >= occ.shape[1] or row >= occ.shape[0]:
        return True
    return occ[row, col] != 0


cdef double _ray_first_hit(const unsigned char[:, :] occ, double resolution,
                           double ox, double oy, double angle, double max_dist) nogil:
    cdef double dx = cos(angle)
    cdef double dy = sin(angle)
    cdef long col = <long>floor(ox / resolution)
    cdef long row = <long>floor(oy / resolution)
    cdef long sx, sy, bx, by
    cdef double tx, ty, t
    if _occupied(occ, col, row):
        return 0.0
    if dx > 0.0:
        sx = 1
        bx = col + 1
    elif dx < 0.0:
        sx = -1
        bx = col
    else:
        sx = 0
        bx = 0
    if dy > 0.0:
        sy = 1
        by = row + 1
    elif dy < 0.0:
        sy = -1
        by = row
    else:
        sy = 0
        by = 0
    while True:
        tx = (bx * resolution - ox) / dx if sx else INFINITY
        ty = (by * resolution - oy) / dy if sy else INFINITY
        t = tx if tx < ty else ty
        if t >= max_dist:
            return max_dist
        if tx <= ty:
            col += sx
            bx += sx
        if ty <= tx:
            row += sy
            by += sy
        if _occupied(occ, col, row):
            return t if t > 0.0 else 0.0


cdef double _segment_first_hit(const unsigned char[:, :] occ, double resolution,
                               double x0, double y0, double x1, double y1) nogil:
    cdef long col = <long>floor(x0 / resolution)
    cdef long row = <long>floor(y0 / resolution)
    cdef long end_col, end_row, sx, sy, bx, by
    cdef double dx, dy, tx, ty, t
    if _occupied(occ, col, row):
        return 0.0
    end_col = <long>floor(x1 / resolution)
    end_row = <long>floor(y1 / resolution)
    if col == end_col and row == end_row:
        return _NO_HIT
    dx = x1 - x0
    dy = y1 - y0
    if dx > 0.0:
        sx = 1
        bx = col + 1
    elif dx < 0.0:
        sx = -1
        bx = col
    else:
        sx = 0
        bx = 0
    if dy > 0.0:
        sy = 1
        by = row + 1
    elif dy < 0.0:
        sy = -1
        by = row
    else:
        sy = 0
        by = 0
    while True:
        tx = (bx * resolution - x0) / dx if sx else INFINITY
        ty = (by * resolution - y0) / dy if sy else INFINITY
        t = tx if tx < ty else ty
        if t > 1.0:
            return _NO_HIT
        if tx <= ty:
            col += sx
            bx += sx
        if ty <= tx:
            row += sy
            by += sy
        if _occupied(occ, col, row):
            return t if t > 0.0 else 0.0
        if col == end_col and row == end_row:
            return _NO_HIT


cdef inline bint _cell_visible(const unsigned char[:, :] occ, double resolution,
                               long col, long row, double tx, double ty,
                               double max_range, double min_dist) nogil:
    cdef double cx, cy, ddx, ddy, d
    if _occupied(occ, col, row):
        return False
    cx = (col + 0.5) * resolution
    cy = (row + 0.5) * resolution
    ddx = tx - cx
    ddy = ty - cy
    d = sqrt(ddx * ddx + ddy * ddy)
    if d <= min_dist or d > max_range:
        return False
    return _segment_first_hit(occ, resolution, cx, cy, tx, ty) >= 1.0


def ray_first_hit(const unsigned char[:, :] occ, double resolution,
                  double ox, double oy, double angle, double max_dist):
    return _ray_first_hit(occ, resolution, ox, oy, angle, max_dist)


def segment_first_hit(const unsigned char[:, :] occ, double resolution,
                      double x0, double y0, double x1, double y1):
    return _segment_first_hit(occ, resolution, x0, y0, x1, y1)


def cast_scan(const unsigned char[:, :] occ, double resolution,
              double ox, double oy, angles, double max_dist):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ang = np.ascontiguousarray(angles, dtype=np.float64)
    cdef Py_ssize_t n = ang.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = _ray_first_hit(occ, resolution, ox, oy, ang[i], max_dist)
    return out


def cell_visible(const unsigned char[:, :] occ, double resolution,
                 long col, long row, double tx, double ty,
                 double max_range, double min_dist):
    return bool(_cell_visible(occ, resolution, col, row, tx, ty, max_range, min_dist))


def visibility_mask(const unsigned char[:, :] occ, double resolution,
                    double tx, double ty, double max_range, double min_dist):
    cdef Py_ssize_t height = occ.shape[0]
    cdef Py_ssize_t width = occ.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((height, width), dtype=np.uint8)
    cdef Py_ssize_t row, col
    with nogil:
        for row in range(height):
            for col in range(width):
                if _cell_visible(occ, resolution, col, row, tx, ty, max_range, min_dist):
                    out[row, col] = 1
    return out


# ---------------------------------------------------------------------------
# A* search

cdef struct _Heap:
    double* f
    double* h
    long* idx
    Py_ssize_t size
    Py_ssize_t cap


cdef inline bint _heap_less(_Heap* hp, Py_ssize_t a, Py_ssize_t b) nogil:
    if hp.f[a] != hp.f[b]:
        return hp.f[a] < hp.f[b]
    if hp.h[a] != hp.h[b]:
        return hp.h[a] < hp.h[b]
    return hp.idx[a] < hp.idx[b]


cdef inline void _heap_swap(_Heap* hp, Py_ssize_t a, Py_ssize_t b) nogil:
    cdef double tf = hp.f[a]
    cdef double th = hp.h[a]
    cdef long ti = hp.idx[a]
    hp.f[a] = hp.f[b]
    hp.h[a] = hp.h[b]
    hp.idx[a] = hp.idx[b]
    hp.f[b] = tf
    hp.h[b] = th
    hp.idx[b] = ti


cdef bint _heap_push(_Heap* hp, double f, double h, long idx) nogil:
    cdef Py_ssize_t i, parent
    cdef Py_ssize_t cap
    if hp.size == hp.cap:
        cap = hp.cap * 2
        hp.f = <double*>realloc(hp.f, cap * sizeof(double))
        hp.h = <double*>realloc(hp.h, cap * sizeof(double))
        hp.idx = <long*>realloc(hp.idx, cap * sizeof(long))
        if hp.f == NULL or hp.h == NULL or hp.idx == NULL:
            return False
        hp.cap = cap
    i = hp.size
    hp.f[i] = f
    hp.h[i] = h
    hp.idx[i] = idx
    hp.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _heap_less(hp, i, parent):
            _heap_swap(hp, i, parent)
            i = parent
        else:
            break
    return True


cdef void _heap_pop(_Heap* hp) nogil:
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t left, right, best
    hp.size -= 1
    if hp.size == 0:
        return
    _heap_swap(hp, 0, hp.size)
    while True:
        left = 2 * i + 1
        right = left + 1
        best = i
        if left < hp.size and _heap_less(hp, left, best):
            best = left
        if right < hp.size and _heap_less(hp, right, best):
            best = right
        if best == i:
            return
        _heap_swap(hp, i, best)
        i = best


def astar_octile(const unsigned char[:, :] occ, long start_col, long start_row,
                 const unsigned char[:, :] goal_mask, const double[:, :] hfield):
    """See ``sightline._kernels._pure.astar_octile``."""
    cdef Py_ssize_t height = occ.shape[0]
    cdef Py_ssize_t width = occ.shape[1]
    cdef Py_ssize_t n = height * width
    if occ[start_row, start_col]:
        return None
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g_arr = np.full(n, np.inf, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] na_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] nd_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] came_arr = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] closed_arr = np.zeros(n, dtype=np.uint8)
    cdef double[:] g = g_arr
    cdef long long[:] na = na_arr
    cdef long long[:] nd = nd_arr
    cdef long long[:] came = came_arr
    cdef unsigned char[:] closed = closed_arr

    cdef _Heap heap
    heap.size = 0
    heap.cap = 1024
    heap.f = <double*>malloc(heap.cap * sizeof(double))
    heap.h = <double*>malloc(heap.cap * sizeof(double))
    heap.idx = <long*>malloc(heap.cap * sizeof(long))
    if heap.f == NULL or heap.h == NULL or heap.idx == NULL:
        free(heap.f)
        free(heap.h)
        free(heap.idx)
        raise MemoryError()

    cdef long start = start_row * width + start_col
    cdef double h0 = hfield[start_row, start_col]
    cdef long idx = -1
    cdef long row, col, nr, nc, j
    cdef long long nai, ndi, na2, nd2
    cdef double g2, hv
    cdef int k
    cdef bint found = False
    cdef bint ok = True

    g[start] = 0.0
    _heap_push(&heap, h0, h0, start)
    with nogil:
        while heap.size > 0:
            idx = heap.idx[0]
            _heap_pop(&heap)
            if closed[idx]:
                continue
            closed[idx] = 1
            row = idx // width
            col = idx - row * width
            if goal_mask[row, col]:
                found = True
                break
            nai = na[idx]
            ndi = nd[idx]
            for k in range(8):
                nr = row + _NB_DR[k]
                nc = col + _NB_DC[k]
                if nr < 0 or nc < 0 or nr >= height or nc >= width:
                    continue
                if occ[nr, nc]:
                    continue
                if _NB_DR[k] != 0 and _NB_DC[k] != 0:
                    if occ[row, nc] or occ[nr, col]:
                        continue
                    na2 = nai
                    nd2 = ndi + 1
                else:
                    na2 = nai + 1
                    nd2 = ndi
                g2 = na2 + nd2 * _SQRT2
                j = nr * width + nc
                if g2 < g[j]:
                    g[j] = g2
                    na[j] = na2
                    nd[j] = nd2
                    came[j] = idx
                    hv = hfield[nr, nc]
                    if not _heap_push(&heap, g2 + hv, hv, j):
                        ok = False
                        break
            if not ok:
                break
    free(heap.f)
    free(heap.h)
    free(heap.idx)
    if not ok:
        raise MemoryError()
    if not found:
        return None
    path = []
    cdef long i = idx
    while i != -1:
        path.append((i - (i // width) * width, i // width))
        i = came[i]
    path.reverse()
    return np.array(path, dtype=np.int32), int(na[idx]), int(nd[idx])
