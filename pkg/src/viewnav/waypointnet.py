"""Waypoint heatmap predictor, NMS decoding, and teacher-student distillation.

The predictor consumes the depth half of each heading's features plus the
slot orientation (sin/cos), fuses per heading, runs two residual self-
attention blocks over the 12 heading tokens, and decodes 10 angle sub-bins
x 12 distance bins per token into a 120 x 12 heatmap. In a teacher-student
pair only the student's fuse layer (the adapter) trains.
"""

import enum
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from . import kernels
from .autodiff import (
    ParamSet,
    ShapeError,
    Tape,
    Tensor,
    attention_block,
    kl_divergence,
    linear,
    reshape,
    sgd_step,
    tanh,
    tmean,
)
from .simworld.render import N_HEADINGS, heading_unit_vectors

M_BINS = 120  # angle bins, 3 degrees each
N_BINS = 12  # distance bins, 0.25 m each starting at 0.25 m
ANGLE_STEP_DEG = 3.0
DIST_STEP_M = 0.25
MODEL_DIM = 64
HEADS = 4
DEFAULT_K = 5
DEFAULT_RADIUS_BINS = 6
_SUB_BINS = M_BINS // N_HEADINGS  # angle sub-bins handled by one heading token

Waypoint = namedtuple("Waypoint", ["angle_deg", "distance_m", "score"])


class WaypointSource(enum.Enum):
    TEACHER = "teacher"
    STUDENT = "student"


@dataclass
class DistillPair:
    teacher: ParamSet  # fully frozen
    student: ParamSet  # only fuse.* trainable
    p2: float = 0.1


def make_predictor_params(seed, depth_dim=16, params=None, prefix=""):
    """Fresh predictor weights; optionally added into an existing ParamSet
    under ``prefix``."""
    rng = np.random.default_rng([seed, 0x3A9])
    p = params if params is not None else ParamSet()
    in_dim = depth_dim + 2

    def w(name, rows, cols):
        p.add(prefix + name, rng.normal(size=(rows, cols)) / np.sqrt(rows))

    def b(name, cols):
        p.add(prefix + name, np.zeros(cols))

    w("fuse.w", in_dim, MODEL_DIM)
    b("fuse.b", MODEL_DIM)
    for i in range(2):
        for part in ("wq", "wk", "wv", "wo"):
            w(f"attn.{i}.{part}", MODEL_DIM, MODEL_DIM)
        for part in ("bq", "bk", "bv", "bo"):
            b(f"attn.{i}.{part}", MODEL_DIM)
    w("head.w1", MODEL_DIM, MODEL_DIM)
    b("head.b1", MODEL_DIM)
    w("head.w2", MODEL_DIM, MODEL_DIM)
    b("head.b2", MODEL_DIM)
    w("head.w3", MODEL_DIM, _SUB_BINS * N_BINS)
    b("head.b3", _SUB_BINS * N_BINS)
    return p


def predictor_inputs(obs):
    """[12, depth_dim + 2] array: depth readings plus slot orientation."""
    feats = np.asarray(obs.headings)
    if feats.ndim != 2 or feats.shape[0] != N_HEADINGS:
        raise ShapeError(f"expected [12, D] observation, got {feats.shape}")
    depth = feats[:, : feats.shape[1] // 2]
    return np.concatenate([depth, heading_unit_vectors()], axis=1)


def predict_heatmap(params, obs, prefix=""):
    """[120, 12] logits tensor; differentiable w.r.t. the predictor params."""
    x = Tensor(predictor_inputs(obs))
    if x.data.shape[1] != params[prefix + "fuse.w"].data.shape[0]:
        raise ShapeError("observation dim does not match fuse layer")
    h = tanh(linear(x, params[prefix + "fuse.w"], params[prefix + "fuse.b"]))
    for i in range(2):
        h = attention_block(h, h, params, f"{prefix}attn.{i}", HEADS)
    y = tanh(linear(h, params[prefix + "head.w1"], params[prefix + "head.b1"]))
    y = tanh(linear(y, params[prefix + "head.w2"], params[prefix + "head.b2"]))
    y = linear(y, params[prefix + "head.w3"], params[prefix + "head.b3"])
    # token j's sub-bin a covers global angle bin 10j + a; row-major reshape
    # lays tokens out exactly that way
    return reshape(y, (M_BINS, N_BINS))


def bin_to_pose(m, n):
    """Bin indices to (angle degrees, distance meters)."""
    if not (0 <= m < M_BINS and 0 <= n < N_BINS):
        raise IndexError(f"bin ({m}, {n}) out of range")
    return (ANGLE_STEP_DEG * m, DIST_STEP_M * (n + 1))


def nms_waypoints(heatmap, k=DEFAULT_K, radius_bins=DEFAULT_RADIUS_BINS):
    """Greedy NMS peaks decoded to relative waypoints, best first."""
    if k < 1 or radius_bins < 1:
        raise ValueError("k and radius_bins must be >= 1")
    logits = heatmap.data if isinstance(heatmap, Tensor) else np.asarray(heatmap)
    logits = np.ascontiguousarray(logits, dtype=np.float64)
    bins = kernels.nms_select(logits, int(k), int(radius_bins))
    out = []
    for m, n in bins:
        angle, dist = bin_to_pose(int(m), int(n))
        out.append(Waypoint(angle, dist, float(logits[m, n])))
    return out


def make_distill_pair(base_params, p2=0.1, prefix=""):
    """Teacher = frozen copy; student = copy with only the adapter (fuse
    layer) trainable. Both start bit-identical to the base predictor."""
    teacher = base_params.subset(prefix)
    teacher.freeze_all()
    student = base_params.subset(prefix)
    for name in student.names():
        student.set_trainable(name, name.startswith("fuse."))
    return DistillPair(teacher=teacher, student=student, p2=p2)


def distill_loss(pair, obs_std, obs_var):
    """KL(teacher heatmap on the standard view || student heatmap on the
    varied view), one softmax over all 1440 bins. Gradients reach only the
    student adapter."""
    t_logits = reshape(predict_heatmap(pair.teacher, obs_std), (-1,))
    s_logits = reshape(predict_heatmap(pair.student, obs_var), (-1,))
    return kl_divergence(t_logits, s_logits)


def select_waypoint_source(p2, rng):
    """Teacher with probability p2 (training-time graph construction only;
    inference always uses the student)."""
    if not 0.0 <= p2 <= 1.0:
        raise ValueError("p2 must be in [0, 1]")
    return WaypointSource.TEACHER if rng.random() < p2 else WaypointSource.STUDENT


def train_adapter(pair, obs_pairs, steps, lr=0.5):
    """Adapter-only distillation on a fixed set of (std, var) observation
    pairs. Returns the per-step mean loss curve (pre-update values).

    Teacher logits are constant here, so they are precomputed once.
    """
    teacher_logits = [
        predict_heatmap(pair.teacher, obs_std).data.reshape(-1)
        for obs_std, _ in obs_pairs
    ]
    curve = np.zeros(steps)
    for it in range(steps):
        pair.student.zero_grad()
        with Tape() as tape:
            losses = [
                kl_divergence(
                    Tensor(t_log),
                    reshape(predict_heatmap(pair.student, obs_var), (-1,)),
                )
                for t_log, (_, obs_var) in zip(teacher_logits, obs_pairs)
            ]
            total = _mean_scalars(losses)
        curve[it] = total.item()
        tape.backward(total)
        sgd_step(pair.student, lr=lr)
    return curve


def _mean_scalars(scalars):
    from .autodiff import stack

    return tmean(stack(scalars))


def mean_distill_loss(pair, obs_pairs):
    """Forward-only mean distillation loss over a fixture set."""
    vals = [distill_loss(pair, s, v).item() for s, v in obs_pairs]
    return float(np.mean(vals))
