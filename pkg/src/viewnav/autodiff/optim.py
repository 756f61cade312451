"""Plain SGD with an optional step-decay schedule."""


def sgd_step(params, grads=None, lr=0.01):
    """In-place p <- p - lr * g for trainable entries; frozen entries are
    left bit-identical. ``grads`` maps names to arrays; if omitted, the
    gradients accumulated on the tensors are used."""
    for name, t in params.trainable_items():
        g = grads.get(name) if grads is not None else t.grad
        if g is None:
            continue
        if g.shape != t.data.shape:
            raise ValueError(f"gradient shape mismatch for {name}")
        t.data -= lr * g
    return params


def decayed_lr(base_lr, iteration, decay_frequency, decay_ratio):
    """Step schedule: lr * ratio^(iteration // frequency)."""
    if decay_frequency <= 0:
        return base_lr
    return base_lr * decay_ratio ** (iteration // decay_frequency)
