"""Finite-difference verification of reverse-mode gradients."""

import numpy as np

from .tensor import GradCheckError, Tape


def grad_check(f, params, step=1e-5, max_entries_per_param=None, seed=0):
    """Max relative error between reverse-mode and central differences.

    ``f`` is a deterministic closure evaluating the scalar loss from the
    current parameter values. Every trainable entry is perturbed unless
    ``max_entries_per_param`` caps the count, in which case a seeded subset
    is checked. Relative error uses max(|a|, |b|, 1e-8) as denominator.
    """
    with Tape() as tape:
        loss = f()
    tape.backward(loss)
    analytic = {}
    for name, t in params.trainable_items():
        g = t.grad if t.grad is not None else np.zeros_like(t.data)
        if not np.all(np.isfinite(g)):
            raise GradCheckError(f"non-finite gradient in {name}")
        analytic[name] = np.array(g, dtype=np.float64)
    tape.zero()

    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, t in params.trainable_items():
        flat = t.data.reshape(-1)
        n = flat.size
        if max_entries_per_param is not None and n > max_entries_per_param:
            idxs = rng.choice(n, size=max_entries_per_param, replace=False)
        else:
            idxs = range(n)
        ga = analytic[name].reshape(-1)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + step
            hi = f().item()
            flat[i] = orig - step
            lo = f().item()
            flat[i] = orig
            numeric = (hi - lo) / (2.0 * step)
            if not np.isfinite(numeric):
                raise GradCheckError(f"non-finite finite-difference in {name}")
            denom = max(abs(numeric), abs(ga[i]), 1e-8)
            worst = max(worst, abs(numeric - ga[i]) / denom)
    return worst
