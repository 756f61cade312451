"""Pure-Python / numpy implementations of the hot kernels.

This backend is selected when the compiled extension is unavailable (or when
VIEWNAV_PURE_PYTHON=1). Each function here is semantically identical to its
compiled twin in ``_impl_c.pyx``; the grid-distance kernel is bit-identical
by construction because distances are tracked as integer step counts.
"""

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)

# 8-connected neighborhood: (dx, dy, is_diagonal)
_NEIGHBORS = (
    (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
    (1, 1, 1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1),
)


def distance_field(occ, sx, sy):
    """Dijkstra over an 8-connected occupancy grid from cell (sx, sy).

    Distances are represented exactly as step counts (n_orth, n_diag); the
    metric value is ``n_orth + sqrt(2) * n_diag`` in cell units. Returns two
    int32 arrays of shape ``occ.shape``; -1 marks unreachable cells.
    """
    w, h = occ.shape
    n_orth = np.full((w, h), -1, dtype=np.int32)
    n_diag = np.full((w, h), -1, dtype=np.int32)
    if sx < 0 or sy < 0 or sx >= w or sy >= h or occ[sx, sy]:
        return n_orth, n_diag
    best = np.full((w, h), np.inf, dtype=np.float64)
    best[sx, sy] = 0.0
    n_orth[sx, sy] = 0
    n_diag[sx, sy] = 0
    heap = [(0.0, sx, sy)]
    while heap:
        key, x, y = heapq.heappop(heap)
        if key != best[x, y]:
            continue
        no = int(n_orth[x, y])
        nd = int(n_diag[x, y])
        for dx, dy, diag in _NEIGHBORS:
            nx = x + dx
            ny = y + dy
            if nx < 0 or ny < 0 or nx >= w or ny >= h or occ[nx, ny]:
                continue
            cno = no + 1 - diag
            cnd = nd + diag
            ckey = cno + SQRT2 * cnd
            if ckey < best[nx, ny]:
                best[nx, ny] = ckey
                n_orth[nx, ny] = cno
                n_diag[nx, ny] = cnd
                heapq.heappush(heap, (ckey, nx, ny))
    return n_orth, n_diag


def ray_wall_distance(ox, oy, dir_x, dir_y, rects, half_extent):
    """First-wall distance for a fan of 2D rays from (ox, oy).

    ``rects`` is (R, 4) float64 of (x0, y0, x1, y1) axis-aligned obstacles;
    the square arena boundary at +-half_extent counts as a wall. Returns a
    float64 array of distances, one per ray direction.
    """
    dir_x = np.asarray(dir_x, dtype=np.float64)
    dir_y = np.asarray(dir_y, dtype=np.float64)
    t = np.minimum(
        _axis_exit(ox, dir_x, half_extent),
        _axis_exit(oy, dir_y, half_extent),
    )
    for x0, y0, x1, y1 in rects:
        lox, hix = _axis_slab(ox, dir_x, x0, x1)
        loy, hiy = _axis_slab(oy, dir_y, y0, y1)
        tmin = np.maximum(lox, loy)
        tmax = np.minimum(hix, hiy)
        hit = (tmax >= tmin) & (tmax > 0.0) & (tmin > 0.0)
        t = np.where(hit & (tmin < t), tmin, t)
    return t


def _axis_exit(o, d, half_extent):
    pos = np.where(d > 0.0, (half_extent - o) / np.where(d != 0.0, d, 1.0), np.inf)
    neg = np.where(d < 0.0, (-half_extent - o) / np.where(d != 0.0, d, 1.0), np.inf)
    return np.where(d > 0.0, pos, np.where(d < 0.0, neg, np.inf))


def _axis_slab(o, d, lo, hi):
    nonzero = d != 0.0
    safe = np.where(nonzero, d, 1.0)
    ta = (lo - o) / safe
    tb = (hi - o) / safe
    inside = (o >= lo) & (o <= hi)
    slab_lo = np.where(nonzero, np.minimum(ta, tb), np.where(inside, -np.inf, np.inf))
    slab_hi = np.where(nonzero, np.maximum(ta, tb), np.where(inside, np.inf, -np.inf))
    return slab_lo, slab_hi


def pitch_resolve(t_wall, pitch_sin, pitch_cos, h0, wall_h, band, max_range):
    """Resolve slant depths for a pitch fan against a wall at distance t.

    ``t_wall`` is (J,) horizontal wall distance per heading, the pitch arrays
    are (P,). A ray hits the floor (z=0), the wall face (0 < z <= wall_h with
    a linear blend to max_range over the top ``band``), or nothing (clamped
    to max_range). Returns depth (J, P), slant distance along each ray.
    """
    t = np.asarray(t_wall, dtype=np.float64)[:, None]
    s = np.asarray(pitch_sin, dtype=np.float64)[None, :]
    c = np.asarray(pitch_cos, dtype=np.float64)[None, :]
    s_wall = t / c
    z_w = h0 + t * (s / c)
    down = s < 0.0
    safe_s = np.where(down, s, -1.0)
    d_floor = -h0 * c / safe_s
    s_floor = -h0 / safe_s
    depth = np.where(down & (d_floor < t), s_floor, s_wall)
    # above the wall top: blend across the band, then open sky
    u = np.clip((z_w - (wall_h - band)) / band, 0.0, 1.0)
    blended = (1.0 - u) * s_wall + u * max_range
    depth = np.where(~down & (z_w > wall_h - band), blended, depth)
    return np.minimum(depth, max_range)


def dtw_cost(a, b):
    """Dynamic-time-warping alignment cost between two 2D point sequences."""
    n = len(a)
    m = len(b)
    prev = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        ax = a[i - 1, 0]
        ay = a[i - 1, 1]
        cur = np.full(m + 1, np.inf)
        for j in range(1, m + 1):
            dx = ax - b[j - 1, 0]
            dy = ay - b[j - 1, 1]
            cost = math.sqrt(dx * dx + dy * dy)
            cur[j] = cost + min(prev[j], cur[j - 1], prev[j - 1])
        prev = cur
    return float(prev[m])


def nms_select(logits, k, radius):
    """Greedy peak picking with circular angular suppression.

    Repeatedly selects the largest unsuppressed bin (ties: lower angle index,
    then lower distance index) and suppresses every bin whose circular
    angle-index distance to a selected bin is < radius. Returns (K', 2) int32
    bin indices; selection stops early if only -inf bins remain.
    """
    m_bins, n_bins = logits.shape
    suppressed = np.zeros(m_bins, dtype=bool)
    out = []
    for _ in range(k):
        masked = np.where(suppressed[:, None], -np.inf, logits)
        flat = int(np.argmax(masked))
        bm, bn = divmod(flat, n_bins)
        if masked[bm, bn] == -np.inf:
            break
        out.append((bm, bn))
        for dm in range(-(radius - 1), radius):
            suppressed[(bm + dm) % m_bins] = True
    return np.array(out, dtype=np.int32).reshape(-1, 2)
