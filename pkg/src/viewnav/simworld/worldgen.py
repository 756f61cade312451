"""Procedural world generation and occupancy rasterization."""

from functools import lru_cache

import numpy as np

from .. import kernels
from .types import GenerationError, WorldMap

_MIN_SIDE = 1.0
_MAX_SIDE = 3.5
_BORDER_MARGIN = 1.0
_CENTER_CLEAR = 1.2  # keep a free disk around the arena center
_CONNECT_FRACTION = 0.95


def generate_world(seed, n_obstacles, extent=20.0, resolution=0.05):
    """Deterministic world with connected free space.

    Retries with fresh obstacle draws (same seed stream) when the flood fill
    from the center covers less than 95% of free cells; raises
    GenerationError after 100 attempts.
    """
    if n_obstacles < 0:
        raise ValueError("n_obstacles must be >= 0")
    rng = np.random.default_rng([seed, 0x57D])
    half = extent / 2.0
    for _ in range(100):
        obstacles = []
        while len(obstacles) < n_obstacles:
            w = rng.uniform(_MIN_SIDE, _MAX_SIDE)
            h = rng.uniform(_MIN_SIDE, _MAX_SIDE)
            x = rng.uniform(-half + _BORDER_MARGIN, half - _BORDER_MARGIN - w)
            y = rng.uniform(-half + _BORDER_MARGIN, half - _BORDER_MARGIN - h)
            if (
                x - _CENTER_CLEAR < 0 < x + w + _CENTER_CLEAR
                and y - _CENTER_CLEAR < 0 < y + h + _CENTER_CLEAR
            ):
                continue
            obstacles.append((x, y, w, h))
        world = WorldMap(
            seed=seed,
            extent=extent,
            obstacles=tuple(obstacles),
            resolution=resolution,
        )
        if connected_fraction(world) >= _CONNECT_FRACTION:
            return world
    raise GenerationError(f"no connected world after 100 attempts (seed={seed})")


@lru_cache(maxsize=256)
def occupancy(world):
    """uint8 grid [cells, cells]; 1 marks cells whose center is inside an
    obstacle. Index order is (ix, iy) with x along the first axis."""
    n = world.cells
    res = world.resolution
    half = world.half
    centers = -half + (np.arange(n) + 0.5) * res
    occ = np.zeros((n, n), dtype=np.uint8)
    for ox, oy, w, h in world.obstacles:
        xs = (centers >= ox) & (centers <= ox + w)
        ys = (centers >= oy) & (centers <= oy + h)
        occ[np.ix_(xs, ys)] = 1
    return occ


@lru_cache(maxsize=256)
def free_cells(world):
    """Flat indices (ix * n + iy) of free cells, ascending."""
    occ = occupancy(world)
    return np.flatnonzero(occ.reshape(-1) == 0)


@lru_cache(maxsize=256)
def obstacle_rects(world):
    """(R, 4) float64 of (x0, y0, x1, y1) rectangles."""
    if not world.obstacles:
        return np.zeros((0, 4), dtype=np.float64)
    arr = np.array(world.obstacles, dtype=np.float64)
    return np.column_stack([arr[:, 0], arr[:, 1], arr[:, 0] + arr[:, 2], arr[:, 1] + arr[:, 3]])


def connected_fraction(world):
    """Fraction of free cells reachable from the center cell (8-connected)."""
    occ = occupancy(world)
    n = world.cells
    cx, cy = world.cell_of(0.0, 0.0)
    if occ[cx, cy]:
        return 0.0
    n_orth, _ = kernels.distance_field(occ, cx, cy)
    free = occ == 0
    reached = n_orth >= 0
    return float(reached.sum()) / float(free.sum())
