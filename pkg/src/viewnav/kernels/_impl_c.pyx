# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_impl_py``.

Scalar formulas are kept identical to the numpy fallback so both backends
produce the same values (bit-identical for the integer-step distance field,
IEEE-identical elementwise arithmetic elsewhere).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sqrt

cnp.import_array()

cdef double SQRT2 = sqrt(2.0)

cdef int NBR_DX[8]
cdef int NBR_DY[8]
cdef int NBR_DIAG[8]
NBR_DX[0] = 1; NBR_DY[0] = 0; NBR_DIAG[0] = 0
NBR_DX[1] = -1; NBR_DY[1] = 0; NBR_DIAG[1] = 0
NBR_DX[2] = 0; NBR_DY[2] = 1; NBR_DIAG[2] = 0
NBR_DX[3] = 0; NBR_DY[3] = -1; NBR_DIAG[3] = 0
NBR_DX[4] = 1; NBR_DY[4] = 1; NBR_DIAG[4] = 1
NBR_DX[5] = 1; NBR_DY[5] = -1; NBR_DIAG[5] = 1
NBR_DX[6] = -1; NBR_DY[6] = 1; NBR_DIAG[6] = 1
NBR_DX[7] = -1; NBR_DY[7] = -1; NBR_DIAG[7] = 1


cdef struct Heap:
    double* keys
    int* cells
    Py_ssize_t size


cdef inline void heap_push(Heap* h, double key, int cell) noexcept:
    cdef Py_ssize_t i = h.size
    cdef Py_ssize_t parent
    h.keys[i] = key
    h.cells[i] = cell
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if h.keys[parent] <= h.keys[i]:
            break
        h.keys[parent], h.keys[i] = h.keys[i], h.keys[parent]
        h.cells[parent], h.cells[i] = h.cells[i], h.cells[parent]
        i = parent


cdef inline int heap_pop(Heap* h, double* key_out) noexcept:
    cdef int cell = h.cells[0]
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t child
    key_out[0] = h.keys[0]
    h.size -= 1
    h.keys[0] = h.keys[h.size]
    h.cells[0] = h.cells[h.size]
    while True:
        child = 2 * i + 1
        if child >= h.size:
            break
        if child + 1 < h.size and h.keys[child + 1] < h.keys[child]:
            child += 1
        if h.keys[i] <= h.keys[child]:
            break
        h.keys[child], h.keys[i] = h.keys[i], h.keys[child]
        h.cells[child], h.cells[i] = h.cells[i], h.cells[child]
        i = child
    return cell


def distance_field(cnp.uint8_t[:, ::1] occ, int sx, int sy):
    """See ``_impl_py.distance_field``."""
    cdef Py_ssize_t w = occ.shape[0]
    cdef Py_ssize_t h = occ.shape[1]
    n_orth_arr = np.full((w, h), -1, dtype=np.int32)
    n_diag_arr = np.full((w, h), -1, dtype=np.int32)
    cdef cnp.int32_t[:, ::1] n_orth = n_orth_arr
    cdef cnp.int32_t[:, ::1] n_diag = n_diag_arr
    if sx < 0 or sy < 0 or sx >= w or sy >= h or occ[sx, sy]:
        return n_orth_arr, n_diag_arr

    best_arr = np.full((w, h), np.inf, dtype=np.float64)
    cdef double[:, ::1] best = best_arr
    keys_buf = np.empty(8 * w * h + 8, dtype=np.float64)
    cells_buf = np.empty(8 * w * h + 8, dtype=np.int32)
    cdef double[::1] keys_mv = keys_buf
    cdef cnp.int32_t[::1] cells_mv = cells_buf
    cdef Heap heap
    heap.keys = &keys_mv[0]
    heap.cells = <int*> &cells_mv[0]
    heap.size = 0

    cdef double key, ckey
    cdef int cell, x, y, nx, ny, no, nd, cno, cnd, k

    best[sx, sy] = 0.0
    n_orth[sx, sy] = 0
    n_diag[sx, sy] = 0
    heap_push(&heap, 0.0, <int> (sx * h + sy))
    while heap.size > 0:
        cell = heap_pop(&heap, &key)
        x = cell // h
        y = cell % h
        if key != best[x, y]:
            continue
        no = n_orth[x, y]
        nd = n_diag[x, y]
        for k in range(8):
            nx = x + NBR_DX[k]
            ny = y + NBR_DY[k]
            if nx < 0 or ny < 0 or nx >= w or ny >= h or occ[nx, ny]:
                continue
            cno = no + 1 - NBR_DIAG[k]
            cnd = nd + NBR_DIAG[k]
            ckey = cno + SQRT2 * cnd
            if ckey < best[nx, ny]:
                best[nx, ny] = ckey
                n_orth[nx, ny] = cno
                n_diag[nx, ny] = cnd
                heap_push(&heap, ckey, <int> (nx * h + ny))
    return n_orth_arr, n_diag_arr


def ray_wall_distance(double ox, double oy,
                      double[::1] dir_x, double[::1] dir_y,
                      double[:, ::1] rects, double half_extent):
    """See ``_impl_py.ray_wall_distance``."""
    cdef Py_ssize_t n_rays = dir_x.shape[0]
    cdef Py_ssize_t n_rects = rects.shape[0]
    out_arr = np.empty(n_rays, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, r
    cdef double dx, dy, t, tmin, tmax, lox, hix, loy, hiy
    for i in range(n_rays):
        dx = dir_x[i]
        dy = dir_y[i]
        t = _axis_exit(ox, dx, half_extent)
        tmin = _axis_exit(oy, dy, half_extent)
        if tmin < t:
            t = tmin
        for r in range(n_rects):
            _axis_slab(ox, dx, rects[r, 0], rects[r, 2], &lox, &hix)
            _axis_slab(oy, dy, rects[r, 1], rects[r, 3], &loy, &hiy)
            tmin = lox if lox > loy else loy
            tmax = hix if hix < hiy else hiy
            if tmax >= tmin and tmax > 0.0 and tmin > 0.0 and tmin < t:
                t = tmin
        out[i] = t
    return out_arr


cdef inline double _axis_exit(double o, double d, double half_extent) noexcept:
    if d > 0.0:
        return (half_extent - o) / d
    elif d < 0.0:
        return (-half_extent - o) / d
    return INFINITY


cdef inline void _axis_slab(double o, double d, double lo, double hi,
                            double* slab_lo, double* slab_hi) noexcept:
    cdef double ta, tb
    if d != 0.0:
        ta = (lo - o) / d
        tb = (hi - o) / d
        if ta < tb:
            slab_lo[0] = ta
            slab_hi[0] = tb
        else:
            slab_lo[0] = tb
            slab_hi[0] = ta
    elif lo <= o <= hi:
        slab_lo[0] = -INFINITY
        slab_hi[0] = INFINITY
    else:
        slab_lo[0] = INFINITY
        slab_hi[0] = -INFINITY


def pitch_resolve(double[::1] t_wall, double[::1] pitch_sin,
                  double[::1] pitch_cos, double h0, double wall_h,
                  double band, double max_range):
    """See ``_impl_py.pitch_resolve``."""
    cdef Py_ssize_t n_head = t_wall.shape[0]
    cdef Py_ssize_t n_pitch = pitch_sin.shape[0]
    out_arr = np.empty((n_head, n_pitch), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t j, p
    cdef double t, s, c, s_wall, z_w, d_floor, depth, u
    for j in range(n_head):
        t = t_wall[j]
        for p in range(n_pitch):
            s = pitch_sin[p]
            c = pitch_cos[p]
            s_wall = t / c
            z_w = h0 + t * (s / c)
            if s < 0.0:
                d_floor = -h0 * c / s
                if d_floor < t:
                    depth = -h0 / s
                else:
                    depth = s_wall
            else:
                depth = s_wall
            if s >= 0.0 and z_w > wall_h - band:
                u = (z_w - (wall_h - band)) / band
                if u > 1.0:
                    u = 1.0
                depth = (1.0 - u) * s_wall + u * max_range
            if depth > max_range:
                depth = max_range
            out[j, p] = depth
    return out_arr


def dtw_cost(double[:, ::1] a, double[:, ::1] b):
    """See ``_impl_py.dtw_cost``."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    prev_arr = np.full(m + 1, np.inf)
    cur_arr = np.full(m + 1, np.inf)
    cdef double[::1] prev = prev_arr
    cdef double[::1] cur = cur_arr
    cdef double[::1] tmp
    cdef Py_ssize_t i, j
    cdef double ax, ay, dx, dy, cost, best
    prev[0] = 0.0
    for i in range(1, n + 1):
        ax = a[i - 1, 0]
        ay = a[i - 1, 1]
        cur[0] = INFINITY
        for j in range(1, m + 1):
            dx = ax - b[j - 1, 0]
            dy = ay - b[j - 1, 1]
            cost = sqrt(dx * dx + dy * dy)
            best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            if prev[j - 1] < best:
                best = prev[j - 1]
            cur[j] = cost + best
        tmp = prev
        prev = cur
        cur = tmp
    return float(prev[m])


def nms_select(double[:, ::1] logits, int k, int radius):
    """See ``_impl_py.nms_select``."""
    cdef Py_ssize_t m_bins = logits.shape[0]
    cdef Py_ssize_t n_bins = logits.shape[1]
    suppressed_arr = np.zeros(m_bins, dtype=np.uint8)
    cdef cnp.uint8_t[::1] suppressed = suppressed_arr
    out = []
    cdef Py_ssize_t m, n, bm, bn
    cdef int sel, dm
    cdef double best, v
    for sel in range(k):
        best = -INFINITY
        bm = -1
        bn = -1
        for m in range(m_bins):
            if suppressed[m]:
                continue
            for n in range(n_bins):
                v = logits[m, n]
                if v > best:
                    best = v
                    bm = m
                    bn = n
        if bm < 0:
            break
        out.append((bm, bn))
        for dm in range(-(radius - 1), radius):
            suppressed[(bm + dm) % m_bins] = 1
    return np.array(out, dtype=np.int32).reshape(-1, 2)
