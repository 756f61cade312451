"""Geodesic (grid shortest-path) oracle over the occupancy grid.

Distances are exact octile values: orthogonal steps cost ``resolution``,
diagonal steps cost ``sqrt(2) * resolution``. Step counts are tracked as
integers so distances are reproducible bit-for-bit across backends.
"""

import math
from functools import lru_cache

import numpy as np

from .. import kernels
from .worldgen import occupancy

SQRT2 = math.sqrt(2.0)

# fixed neighbor scan order for deterministic path backtracking
_NEIGHBORS = (
    (1, 0), (-1, 0), (0, 1), (0, -1),
    (1, 1), (1, -1), (-1, 1), (-1, -1),
)


class DistanceField:
    """All-cells geodesic distances from a source point."""

    def __init__(self, world, n_orth, n_diag):
        self.world = world
        self.n_orth = n_orth
        self.n_diag = n_diag
        self._unit_diag = SQRT2 * world.resolution

    def meters_cell(self, ix, iy):
        no = self.n_orth[ix, iy]
        if no < 0:
            return math.inf
        return no * self.world.resolution + self.n_diag[ix, iy] * self._unit_diag

    def meters_at(self, x, y):
        return self.meters_cell(*self.world.cell_of(x, y))

    def meters_many(self, points):
        """Vectorized lookup for an (N, 2) array of positions."""
        out = np.empty(len(points))
        for i, (x, y) in enumerate(points):
            out[i] = self.meters_at(x, y)
        return out


@lru_cache(maxsize=256)
def _field_from_cell(world, ix, iy):
    occ = occupancy(world)
    n_orth, n_diag = kernels.distance_field(occ, ix, iy)
    return DistanceField(world, n_orth, n_diag)


def distance_field_from(world, point):
    """Distance field with the given point's cell as source (cached)."""
    ix, iy = world.cell_of(point[0], point[1])
    return _field_from_cell(world, ix, iy)


def geodesic_distance(world, a, b):
    """Shortest 8-connected grid-path length between two points (meters);
    returns inf when unreachable."""
    return distance_field_from(world, b).meters_at(a[0], a[1])


def descend_path(world, field, start):
    """Grid path (cell centers, (P, 2) meters) from ``start`` down the
    distance field to its source. Ties break on a fixed neighbor order."""
    occ = occupancy(world)
    n = world.cells
    ix, iy = world.cell_of(start[0], start[1])
    if field.n_orth[ix, iy] < 0:
        raise ValueError("start unreachable from field source")
    path = [(ix, iy)]
    key = field.n_orth[ix, iy] + SQRT2 * field.n_diag[ix, iy]
    while key > 0.0:
        best_key = key
        best = None
        for dx, dy in _NEIGHBORS:
            nx, ny = ix + dx, iy + dy
            if nx < 0 or ny < 0 or nx >= n or ny >= n or occ[nx, ny]:
                continue
            no = field.n_orth[nx, ny]
            if no < 0:
                continue
            nkey = no + SQRT2 * field.n_diag[nx, ny]
            if nkey < best_key:
                best_key = nkey
                best = (nx, ny)
        if best is None:
            raise RuntimeError("descent stalled; inconsistent field")
        ix, iy = best
        key = best_key
        path.append(best)
    return np.array([world.cell_center(ix, iy) for ix, iy in path])
