"""Panoramic depth + texture renderer.

Each of the 12 heading slots gets a fan of pitch rays cast from the camera
height; rays hit the floor, obstacle/boundary walls (with a smooth blend
across the wall top), or clamp at max range. Depth readings are concatenated
with procedural texture samples at the hit points, so features vary smoothly
and nontrivially with the camera offset.
"""

from functools import lru_cache

import numpy as np

from .. import kernels
from .types import PanoObservation
from .worldgen import obstacle_rects

N_HEADINGS = 12
BASE_CAMERA_HEIGHT = 1.25
WALL_HEIGHT = 2.5
TOP_BLEND_BAND = 0.25
MAX_RANGE = 10.0
PITCH_HALF_FAN = 45.0
_N_TEX_COMPONENTS = 8


@lru_cache(maxsize=256)
def _texture_params(world):
    rng = np.random.default_rng([world.seed, 0x7E7])
    direction = rng.normal(size=(_N_TEX_COMPONENTS, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    omega = direction * rng.uniform(0.4, 2.2, size=(_N_TEX_COMPONENTS, 1))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=_N_TEX_COMPONENTS)
    return omega, phase


def texture_at(world, points):
    """Smooth scalar texture field in [-2, 2], seeded by the world."""
    omega, phase = _texture_params(world)
    args = points @ omega.T + phase
    return np.sin(args).sum(axis=-1) * (2.0 / _N_TEX_COMPONENTS)


def render_panorama(world, pose, offset, dim=32):
    """Deterministic [12, dim] observation; slot j looks along
    pose.heading + 30*j degrees. dim/2 depth readings + dim/2 texture
    samples per slot."""
    if dim % 2 != 0:
        raise ValueError("feature dim must be even")
    n_rays = dim // 2
    h0 = BASE_CAMERA_HEIGHT + offset.dh
    yaw_deg = pose.heading + 30.0 * np.arange(N_HEADINGS)
    yaw = np.deg2rad(yaw_deg)
    dir_x = np.cos(yaw)
    dir_y = np.sin(yaw)
    t_wall = kernels.ray_wall_distance(
        pose.x, pose.y, dir_x, dir_y, obstacle_rects(world), world.half
    )
    pitch = np.deg2rad(
        np.linspace(-PITCH_HALF_FAN + offset.dtheta, PITCH_HALF_FAN + offset.dtheta, n_rays)
    )
    p_sin = np.sin(pitch)
    p_cos = np.cos(pitch)
    depth = kernels.pitch_resolve(
        np.ascontiguousarray(t_wall), p_sin, p_cos, h0, WALL_HEIGHT, TOP_BLEND_BAND, MAX_RANGE
    )
    horiz = depth * p_cos[None, :]
    hits = np.stack(
        [
            pose.x + horiz * dir_x[:, None],
            pose.y + horiz * dir_y[:, None],
            h0 + depth * p_sin[None, :],
        ],
        axis=-1,
    )
    tex = texture_at(world, hits)
    features = np.concatenate([depth / MAX_RANGE, tex], axis=1)
    return PanoObservation(headings=features, capture_offset=offset)


def heading_unit_vectors():
    """(sin, cos) of the 12 slot yaws relative to the agent heading."""
    rel = np.deg2rad(30.0 * np.arange(N_HEADINGS))
    return np.column_stack([np.sin(rel), np.cos(rel)])
