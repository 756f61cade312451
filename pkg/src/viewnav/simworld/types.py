"""Core value types for the synthetic world."""

from dataclasses import dataclass

import numpy as np


class GenerationError(RuntimeError):
    """World generation could not satisfy its constraints."""


class SamplingError(RuntimeError):
    """Episode sampling exhausted its retry budget."""


@dataclass(frozen=True)
class WorldMap:
    """A square arena with axis-aligned rectangular obstacles.

    Coordinates span [-extent/2, extent/2] in both axes; the arena boundary
    acts as a wall. ``resolution`` is the occupancy-cell size used by the
    geodesic oracle only.
    """

    seed: int
    extent: float = 20.0
    obstacles: tuple = ()  # (x, y, w, h) lower-left corner + size, meters
    resolution: float = 0.05

    @property
    def half(self):
        return self.extent / 2.0

    @property
    def cells(self):
        return int(round(self.extent / self.resolution))

    def in_free_space(self, x, y):
        if abs(x) >= self.half or abs(y) >= self.half:
            return False
        for ox, oy, w, h in self.obstacles:
            if ox <= x <= ox + w and oy <= y <= oy + h:
                return False
        return True

    def cell_of(self, x, y):
        n = self.cells
        ix = int(np.floor((x + self.half) / self.resolution))
        iy = int(np.floor((y + self.half) / self.resolution))
        return min(max(ix, 0), n - 1), min(max(iy, 0), n - 1)

    def cell_center(self, ix, iy):
        return (
            -self.half + (ix + 0.5) * self.resolution,
            -self.half + (iy + 0.5) * self.resolution,
        )


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float  # degrees in [0, 360)


@dataclass(frozen=True)
class CameraOffset:
    """Viewpoint perturbation: height offset (m) and pitch offset (deg)."""

    dh: float = 0.0
    dtheta: float = 0.0


STANDARD_OFFSET = CameraOffset(0.0, 0.0)


@dataclass
class PanoObservation:
    """12 per-heading feature vectors; slot j looks along heading + 30j deg."""

    headings: np.ndarray  # [12, D]
    capture_offset: CameraOffset


@dataclass
class Episode:
    episode_id: str
    world_id: int
    start: Pose
    goal: tuple  # (x, y)
    instruction: np.ndarray  # [T, D_instr]
    gt_path: np.ndarray  # [P, 2] waypoints along the geodesic path
    gt_length: float
