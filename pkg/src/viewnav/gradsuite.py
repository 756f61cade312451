"""Gradient verification battery: per-op checks plus the combined objective
on a 2-episode micro-batch. Shared by the CLI ``gradcheck`` command and the
acceptance suite."""

import numpy as np

from .autodiff import (
    ParamSet,
    Tensor,
    cosine_similarity,
    cross_entropy,
    grad_check,
    kl_divergence,
    linear,
    mhsa,
    softmax,
    stack,
    tanh,
    tmean,
    tsum,
)
from .navgraph import rollout
from .policy import make_base_policy, wrap_vil
from .simworld.episodes import make_episode
from .simworld.types import CameraOffset, STANDARD_OFFSET
from .simworld.worldgen import generate_world
from .vilcore import ContrastiveBatch, VILConfig, infonce_loss, total_loss

TOLERANCE = 1e-4


def check_linear(seed):
    rng = np.random.default_rng(seed)
    p = ParamSet()
    w = p.add("w", rng.normal(size=(5, 3)))
    b = p.add("b", rng.normal(size=3))
    x = rng.normal(size=(4, 5))
    return grad_check(lambda: tsum(tanh(linear(Tensor(x), w, b))), p)


def check_mhsa(seed, tokens=2, heads=2, dim=4):
    rng = np.random.default_rng(seed)
    p = ParamSet()
    q = p.add("q", rng.normal(size=(tokens, dim)))
    k = p.add("k", rng.normal(size=(tokens, dim)))
    v = p.add("v", rng.normal(size=(tokens, dim)))
    wo = p.add("wo", rng.normal(size=(dim, dim)))
    bo = p.add("bo", rng.normal(size=dim))
    return grad_check(lambda: tsum(tanh(mhsa(q, k, v, heads, wo, bo))), p)


def check_softmax_composite(seed):
    rng = np.random.default_rng(seed)
    p = ParamSet()
    x = p.add("x", rng.normal(size=(3, 6)))
    tgt = rng.normal(size=(3, 6))
    return grad_check(lambda: tsum(softmax(x, axis=-1) * Tensor(tgt)), p)


def check_cross_entropy(seed):
    rng = np.random.default_rng(seed)
    p = ParamSet()
    x = p.add("x", rng.normal(size=(4, 5)))
    targets = rng.integers(0, 5, size=4)
    return grad_check(lambda: cross_entropy(x, targets), p)


def check_kl(seed):
    rng = np.random.default_rng(seed)
    p = ParamSet()
    q = p.add("q", rng.normal(size=(3, 7)))
    ref = rng.normal(size=(3, 7))
    return grad_check(lambda: kl_divergence(Tensor(ref), q), p)


def check_infonce(seed):
    rng = np.random.default_rng(seed)
    p = ParamSet()
    std = p.add("std", rng.normal(size=(3, 12, 6)))
    var = p.add("var", rng.normal(size=(3, 12, 6)))
    return grad_check(
        lambda: infonce_loss(ContrastiveBatch(std, var), tau=0.5), p
    )


def check_cosine(seed):
    rng = np.random.default_rng(seed)
    p = ParamSet()
    a = p.add("a", rng.normal(size=(4, 6)))
    b = p.add("b", rng.normal(size=(4, 6)))
    return grad_check(lambda: tmean(cosine_similarity(a, b)), p)


OP_CHECKS = {
    "linear": check_linear,
    "mhsa": check_mhsa,
    "softmax": check_softmax_composite,
    "cross_entropy": check_cross_entropy,
    "kl_divergence": check_kl,
    "infonce": check_infonce,
    "cosine_similarity": check_cosine,
}


def micro_fixture(seed=0):
    """Tiny world + 2 episodes + low-dim policy for full-loss checks."""
    world = generate_world(900 + seed, 2, extent=6.0, resolution=0.1)
    episodes = []
    k = 0
    while len(episodes) < 2:
        try:
            episodes.append(make_episode(world, 50 + seed * 7 + k))
        except Exception:
            pass
        k += 1
    base = make_base_policy(seed + 3, obs_dim=8)
    return world, episodes, base


def full_vil_loss(bundle, world, episodes, cfg, rng_seed, max_steps=2):
    """Combined objective on the micro-batch; deterministic in rng_seed."""
    rng = np.random.default_rng(rng_seed)
    nav, wpd, c_std, c_var = [], [], [], []
    for i, ep in enumerate(episodes):
        res = rollout(
            bundle, world, ep, STANDARD_OFFSET, mode="train", rng=rng,
            max_steps=max_steps, vil_cfg=cfg,
            var_offset=CameraOffset(0.21 + 0.1 * i, -12.0 + 5.0 * i),
        )
        nav.extend(res.nav_losses)
        wpd.extend(res.distill_losses)
        c_std.extend(res.contrast_std)
        c_var.extend(res.contrast_var)
    l_nav = tmean(stack(nav))
    l_wpd = tmean(stack(wpd))
    l_cl = infonce_loss(ContrastiveBatch(stack(c_std), stack(c_var)), cfg.tau)
    return total_loss(l_nav, l_cl, l_wpd, cfg)


def check_full_vil(seed, max_entries_per_param=2):
    world, episodes, base = micro_fixture(seed % 3)
    bundle = wrap_vil(base, seed=seed)
    cfg = VILConfig(seed=seed)
    trainable = ParamSet()
    for name, t in bundle.params.trainable_items():
        trainable._items[name] = t  # share tensors so FD perturbs the model
    f = lambda: full_vil_loss(bundle, world, episodes, cfg, rng_seed=seed)
    return grad_check(
        f, trainable, max_entries_per_param=max_entries_per_param, seed=seed
    )


def run_suite(n_seeds=20, include_full=True, log=None):
    """Run the whole battery; returns {check_name: worst_error}."""
    results = {}
    for name, fn in OP_CHECKS.items():
        worst = max(fn(seed) for seed in range(n_seeds))
        results[name] = worst
        if log:
            log(f"{name}: max rel err {worst:.3e} over {n_seeds} seeds")
    if include_full:
        worst = max(check_full_vil(seed) for seed in range(n_seeds))
        results["full_vil_loss"] = worst
        if log:
            log(f"full_vil_loss: max rel err {worst:.3e} over {n_seeds} seeds")
    return results
