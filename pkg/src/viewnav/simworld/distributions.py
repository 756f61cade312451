"""Viewpoint offset distributions over the (dh, dtheta) box."""

from dataclasses import dataclass

import numpy as np

from .types import CameraOffset

DEFAULT_BOUNDS = (-0.5, 0.5, -30.0, 30.0)

# triangular supports in normalized (u, v) coordinates: A is the lower-left
# triangle u + v <= 0.9, B the upper-right u + v >= 1.1 (strictly disjoint,
# 0.2-wide dead band along the anti-diagonal)
_TRI_A_MAX = 0.9
_TRI_B_MIN = 1.1

KINDS = ("standard", "uniform2d", "triangularA", "triangularB", "fixed")


@dataclass(frozen=True)
class ViewpointDistribution:
    kind: str
    bounds: tuple = DEFAULT_BOUNDS
    dh: float = 0.0  # for kind == "fixed"
    dtheta: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown viewpoint distribution: {self.kind}")


STANDARD = ViewpointDistribution("standard")
UNIFORM2D = ViewpointDistribution("uniform2d")
TRIANGULAR_A = ViewpointDistribution("triangularA")
TRIANGULAR_B = ViewpointDistribution("triangularB")


def fixed(dh, dtheta):
    return ViewpointDistribution("fixed", dh=dh, dtheta=dtheta)


def _normalize(dist, offset):
    lo_h, hi_h, lo_t, hi_t = dist.bounds
    u = (offset.dh - lo_h) / (hi_h - lo_h)
    v = (offset.dtheta - lo_t) / (hi_t - lo_t)
    return u, v


def in_support(dist, offset):
    if dist.kind == "standard":
        return offset.dh == 0.0 and offset.dtheta == 0.0
    if dist.kind == "fixed":
        return offset.dh == dist.dh and offset.dtheta == dist.dtheta
    u, v = _normalize(dist, offset)
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        return False
    if dist.kind == "uniform2d":
        return True
    if dist.kind == "triangularA":
        return u + v <= _TRI_A_MAX
    return u + v >= _TRI_B_MIN  # triangularB


def sample_viewpoint(dist, rng):
    """One CameraOffset from the distribution; rng is a seed or Generator."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if dist.kind == "standard":
        return CameraOffset(0.0, 0.0)
    if dist.kind == "fixed":
        return CameraOffset(dist.dh, dist.dtheta)
    lo_h, hi_h, lo_t, hi_t = dist.bounds
    for _ in range(10000):
        off = CameraOffset(rng.uniform(lo_h, hi_h), rng.uniform(lo_t, hi_t))
        if in_support(dist, off):
            return off
    raise RuntimeError(f"rejection sampling failed for {dist.kind}")


def supports_disjoint(a, b, probes=201):
    """Dense-grid check that no offset lies in both supports."""
    bounds = a.bounds
    hs = np.linspace(bounds[0], bounds[1], probes)
    ts = np.linspace(bounds[2], bounds[3], probes)
    for dh in hs:
        for dt in ts:
            off = CameraOffset(float(dh), float(dt))
            if in_support(a, off) and in_support(b, off):
                return False
    return True


def grid_offsets(grid_size=9, bounds=DEFAULT_BOUNDS):
    """Uniform grid_size x grid_size product grid over the offset box,
    corners included; row index walks dh, column index walks dtheta."""
    lo_h, hi_h, lo_t, hi_t = bounds
    hs = np.linspace(lo_h, hi_h, grid_size)
    ts = np.linspace(lo_t, hi_t, grid_size)
    return [[CameraOffset(float(h), float(t)) for t in ts] for h in hs]
