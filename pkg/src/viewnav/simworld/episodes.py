"""Episode sampling and the synthetic instruction encoding.

Instructions deterministically encode the ground-truth path as a sequence
of leg tokens (bearing relative to the start heading, turn, leg/cumulative
length), so goal selection genuinely depends on reading them.
"""

import math

import numpy as np

from .geodesic import descend_path, distance_field_from
from .types import Episode, Pose, SamplingError
from .worldgen import free_cells, occupancy

INSTRUCTION_DIM = 16
MIN_GEODESIC = 3.0
MAX_GEODESIC = 12.0
_PATH_SPACING_CELLS = 5
_RDP_EPSILON = 0.3
_MAX_LEGS = 10


def make_episode(world, rng_seed, episode_id=None):
    """Sample a start/goal pair with geodesic length in [3, 12] m and build
    the ground-truth path and instruction. Deterministic in (world, seed)."""
    rng = np.random.default_rng([rng_seed, world.seed, 0xE9])
    cells = free_cells(world)
    n = world.cells
    for _ in range(200):
        s_flat, g_flat = rng.choice(cells, size=2, replace=False)
        six, siy = divmod(int(s_flat), n)
        gix, giy = divmod(int(g_flat), n)
        goal = world.cell_center(gix, giy)
        field = distance_field_from(world, goal)
        gt_length = field.meters_cell(six, siy)
        if MIN_GEODESIC <= gt_length <= MAX_GEODESIC:
            break
    else:
        raise SamplingError(f"no valid episode after 200 draws (seed={rng_seed})")

    start_xy = world.cell_center(six, siy)
    grid_path = descend_path(world, field, start_xy)
    gt_path = _downsample(grid_path)
    legs = _legs(simplify_path(gt_path, _RDP_EPSILON))
    heading = legs[0][0] % 360.0
    instruction = encode_instruction(legs, heading)
    if episode_id is None:
        episode_id = f"w{world.seed}-e{rng_seed}"
    return Episode(
        episode_id=str(episode_id),
        world_id=world.seed,
        start=Pose(start_xy[0], start_xy[1], heading),
        goal=goal,
        instruction=instruction,
        gt_path=gt_path,
        gt_length=gt_length,
    )


def _downsample(grid_path):
    idx = list(range(0, len(grid_path), _PATH_SPACING_CELLS))
    if idx[-1] != len(grid_path) - 1:
        idx.append(len(grid_path) - 1)
    return np.array(grid_path[idx])


def simplify_path(points, epsilon):
    """Ramer-Douglas-Peucker polyline simplification."""
    points = np.asarray(points)
    if len(points) <= 2:
        return points
    keep = np.zeros(len(points), dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, len(points) - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi <= lo + 1:
            continue
        seg = points[hi] - points[lo]
        seg_len = math.hypot(seg[0], seg[1])
        rel = points[lo + 1 : hi] - points[lo]
        if seg_len == 0.0:
            dist = np.hypot(rel[:, 0], rel[:, 1])
        else:
            dist = np.abs(rel[:, 0] * seg[1] - rel[:, 1] * seg[0]) / seg_len
        worst = int(np.argmax(dist))
        if dist[worst] > epsilon:
            split = lo + 1 + worst
            keep[split] = True
            stack.append((lo, split))
            stack.append((split, hi))
    return points[keep]


def _legs(vertices):
    """(bearing_deg, length, cum_length) per leg of a simplified polyline."""
    legs = []
    cum = 0.0
    for a, b in zip(vertices[:-1], vertices[1:]):
        dx, dy = b[0] - a[0], b[1] - a[1]
        length = math.hypot(dx, dy)
        cum += length
        legs.append((math.degrees(math.atan2(dy, dx)), length, cum))
    return legs[:_MAX_LEGS]


def encode_instruction(legs, start_heading):
    """[T, 16] token matrix describing the legs relative to start heading."""
    tokens = np.zeros((len(legs), INSTRUCTION_DIM))
    prev_bearing = start_heading
    n = len(legs)
    for i, (bearing, length, cum) in enumerate(legs):
        rel = math.radians(bearing - start_heading)
        turn = math.radians(bearing - prev_bearing)
        prev_bearing = bearing
        tokens[i] = [
            math.sin(rel),
            math.cos(rel),
            math.sin(turn),
            math.cos(turn),
            length / MAX_GEODESIC,
            cum / MAX_GEODESIC,
            (n - 1 - i) / _MAX_LEGS,
            1.0 if i == n - 1 else 0.0,
            math.sin(2.0 * rel),
            math.cos(2.0 * rel),
            math.sin(math.pi * cum / MAX_GEODESIC),
            math.cos(math.pi * cum / MAX_GEODESIC),
            math.sin(math.pi * length / MIN_GEODESIC),
            math.cos(math.pi * length / MIN_GEODESIC),
            i / _MAX_LEGS,
            1.0,
        ]
    return tokens


def sample_free_pose(world, rng, heading=0.0):
    """Uniform free-cell pose; used by fixtures and robustness probes."""
    cells = free_cells(world)
    flat = int(rng.choice(cells))
    ix, iy = divmod(flat, world.cells)
    x, y = world.cell_center(ix, iy)
    return Pose(x, y, heading)


def path_in_free_space(world, path):
    occ = occupancy(world)
    return all(not occ[world.cell_of(x, y)] for x, y in path)
