"""Post-training strategy: contrastive alignment across viewpoints plus
waypoint distillation, jointly optimized with the navigation loss.

``vil_posttrain`` wraps a pretrained base policy (projection head with
identity-initialized first layer, frozen teacher, adapter-only student) and
runs the combined objective; ``nav_pretrain`` is the plain standard-viewpoint
navigation training that produces base policies.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .autodiff import (
    Tape,
    Tensor,
    cosine_similarity,
    cross_entropy,
    decayed_lr,
    reshape,
    sgd_step,
    stack,
    tmean,
)
from .navgraph import rollout
from .policy import project_contrast, project_task, wrap_vil
from .simworld.distributions import UNIFORM2D, sample_viewpoint
from .simworld.types import STANDARD_OFFSET

N_VIEWS = 12


class TrainingDivergenceError(RuntimeError):
    """A loss became non-finite during training."""


class DegenerateBatchError(ValueError):
    """Contrastive batches need at least two scenes."""


class ViewSource(enum.Enum):
    STD = "std"
    VAR = "var"


@dataclass
class VILConfig:
    p1: float = 0.1
    p2: float = 0.1
    lambda1: float = 0.2
    lambda2: float = 10.0
    tau: float = 0.1
    iterations: int = 500
    lr: float = 0.05
    decay_frequency: int = 200
    decay_ratio: float = 0.75
    seed: int = 0

    def validate(self):
        if not (0.0 <= self.p1 <= 1.0 and 0.0 <= self.p2 <= 1.0):
            raise ValueError("p1/p2 must be probabilities")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.lambda1 < 0.0 or self.lambda2 < 0.0:
            raise ValueError("loss weights must be nonnegative")
        return self


@dataclass
class ContrastiveBatch:
    """Per-scene, per-heading contrast features from the two branches."""

    std_feats: object  # Tensor [B, 12, dim]
    var_feats: object  # Tensor [B, 12, dim]


def negative_indices(i, j, batch_size):
    """The two negatives for query (i, j): opposite heading in the same
    scene, and the same heading in the next scene."""
    if batch_size < 2:
        raise DegenerateBatchError("batch_size must be >= 2")
    if not (0 <= i < batch_size and 0 <= j < N_VIEWS):
        raise IndexError("scene/heading index out of range")
    return [(i, (j + 6) % N_VIEWS), ((i + 1) % batch_size, j)]


def infonce_loss(batch, tau):
    """Mean InfoNCE over all (scene, heading) queries.

    Query = standard-view feature, positive = varied-view feature of the
    same slot, negatives per ``negative_indices``; similarity is cosine.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    std, var = batch.std_feats, batch.var_feats
    b = std.data.shape[0]
    if b < 2:
        raise DegenerateBatchError("contrastive batch needs >= 2 scenes")
    from .autodiff import index_select

    heading_perm = (np.arange(N_VIEWS) + 6) % N_VIEWS
    scene_perm = (np.arange(b) + 1) % b
    neg1 = index_select(var, 1, heading_perm)
    neg2 = index_select(var, 0, scene_perm)
    s_pos = cosine_similarity(std, var)
    s_n1 = cosine_similarity(std, neg1)
    s_n2 = cosine_similarity(std, neg2)
    logits = stack([reshape(s_pos, (-1,)), reshape(s_n1, (-1,)), reshape(s_n2, (-1,))], axis=1)
    logits = logits * (1.0 / tau)
    targets = np.zeros(logits.data.shape[0], dtype=np.int64)
    return cross_entropy(logits, targets)


def sample_view_source(p1, rng):
    """Std with probability p1 (training-time graph features; inference
    under a varied protocol always uses the actual varied view)."""
    if not 0.0 <= p1 <= 1.0:
        raise ValueError("p1 must be in [0, 1]")
    return ViewSource.STD if rng.random() < p1 else ViewSource.VAR


def total_loss(l_nav, l_cl, l_wpd, cfg):
    """L = L_nav + lambda1 * L_cl + lambda2 * L_wpd."""
    for name, part in (("nav", l_nav), ("cl", l_cl), ("wpd", l_wpd)):
        value = part.item() if isinstance(part, Tensor) else float(part)
        if not np.isfinite(value):
            raise TrainingDivergenceError(f"non-finite {name} loss: {value}")
    return l_nav + cfg.lambda1 * l_cl + cfg.lambda2 * l_wpd


@dataclass
class CurveRow:
    iteration: int
    l_nav: float
    l_cl: float
    l_wpd: float
    total: float

    def as_tuple(self):
        return (self.iteration, self.l_nav, self.l_cl, self.l_wpd, self.total)


def _episode_batch(rng, episodes, batch_size):
    n = len(episodes)
    idx = rng.choice(n, size=min(batch_size, n), replace=n < batch_size)
    return [episodes[int(i)] for i in idx]


def vil_posttrain(base, worlds, episodes, cfg, batch_size=8,
                  train_dist=UNIFORM2D, hook=None, wrap_seed=0):
    """Post-train a base policy for viewpoint robustness.

    Per iteration: sample a mini-batch of episodes; per episode sample one
    varied offset and run a teacher-forced rollout collecting navigation,
    distillation, and contrastive terms; update with SGD on the combined
    objective. Teacher and all frozen parameters stay bit-identical.

    Returns (wrapped policy, loss-curve rows). ``hook(iteration, bundle)``
    runs after each update (checkpoint selection lives there).
    """
    cfg.validate()
    bundle = wrap_vil(base, seed=wrap_seed)
    rng = np.random.default_rng([cfg.seed, 0x71A])
    curve = []
    for it in range(cfg.iterations):
        lr = decayed_lr(cfg.lr, it, cfg.decay_frequency, cfg.decay_ratio)
        bundle.params.zero_grad()
        nav_terms, wpd_terms, c_std, c_var = [], [], [], []
        with Tape() as tape:
            for ep in _episode_batch(rng, episodes, batch_size):
                world = worlds[ep.world_id]
                var_off = sample_viewpoint(train_dist, rng)
                res = rollout(
                    bundle, world, ep, STANDARD_OFFSET,
                    mode="train", rng=rng, vil_cfg=cfg, var_offset=var_off,
                )
                nav_terms.extend(res.nav_losses)
                wpd_terms.extend(res.distill_losses)
                c_std.extend(res.contrast_std)
                c_var.extend(res.contrast_var)
            l_nav = tmean(stack(nav_terms))
            l_wpd = tmean(stack(wpd_terms))
            l_cl = infonce_loss(
                ContrastiveBatch(stack(c_std), stack(c_var)), cfg.tau
            )
            loss = total_loss(l_nav, l_cl, l_wpd, cfg)
        tape.backward(loss)
        sgd_step(bundle.params, lr=lr)
        curve.append(CurveRow(it, l_nav.item(), l_cl.item(), l_wpd.item(), loss.item()))
        if hook is not None:
            hook(it, bundle)
    return bundle, curve


def nav_pretrain(bundle, worlds, episodes, iterations, lr, decay_frequency=200,
                 decay_ratio=0.75, batch_size=8, seed=0, hook=None):
    """Standard-viewpoint navigation training (produces base policies)."""
    rng = np.random.default_rng([seed, 0xB45E])
    curve = []
    for it in range(iterations):
        step_lr = decayed_lr(lr, it, decay_frequency, decay_ratio)
        bundle.params.zero_grad()
        nav_terms = []
        with Tape() as tape:
            for ep in _episode_batch(rng, episodes, batch_size):
                res = rollout(
                    bundle, worlds[ep.world_id], ep, STANDARD_OFFSET,
                    mode="train", rng=rng,
                )
                nav_terms.extend(res.nav_losses)
            l_nav = tmean(stack(nav_terms))
        value = l_nav.item()
        if not np.isfinite(value):
            raise TrainingDivergenceError(f"non-finite nav loss: {value}")
        tape.backward(l_nav)
        sgd_step(bundle.params, lr=step_lr)
        curve.append(CurveRow(it, value, 0.0, 0.0, value))
        if hook is not None:
            hook(it, bundle)
    return curve


__all__ = [
    "ContrastiveBatch",
    "CurveRow",
    "DegenerateBatchError",
    "TrainingDivergenceError",
    "VILConfig",
    "ViewSource",
    "infonce_loss",
    "nav_pretrain",
    "negative_indices",
    "project_contrast",
    "project_task",
    "sample_view_source",
    "total_loss",
    "vil_posttrain",
]
