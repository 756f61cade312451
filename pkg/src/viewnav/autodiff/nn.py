"""Network building blocks on top of the tensor engine."""

import math

import numpy as np

from .tensor import (
    ShapeError,
    Tensor,
    as_tensor,
    concat,
    exp,
    log,
    matmul,
    mul,
    sqrt,
    sub,
    tmean,
    transpose,
    tsum,
)


def linear(x, w, b=None):
    """y = x @ w + b for x of shape [..., I] flattened to 2D internally."""
    x, w = as_tensor(x), as_tensor(w)
    if x.data.shape[-1] != w.data.shape[0]:
        raise ShapeError(
            f"linear: input dim {x.data.shape[-1]} != weight rows {w.data.shape[0]}"
        )
    lead = x.data.shape[:-1]
    flat = x if x.data.ndim == 2 else _reshape2(x, w.data.shape[0])
    y = matmul(flat, w)
    if b is not None:
        b = as_tensor(b)
        if b.data.shape != (w.data.shape[1],):
            raise ShapeError("linear: bias shape mismatch")
        y = y + b
    if len(lead) != 1:
        from .tensor import reshape

        y = reshape(y, lead + (w.data.shape[1],))
    return y


def _reshape2(x, in_dim):
    from .tensor import reshape

    return reshape(x, (-1, in_dim))


def softmax(x, axis=-1):
    """Shift-invariant softmax along ``axis``."""
    x = as_tensor(x)
    shift = np.max(x.data, axis=axis, keepdims=True)
    e = exp(sub(x, shift))
    return e / tsum(e, axis=_pos_axis(axis, x.data.ndim), keepdims=True)


def log_softmax(x, axis=-1):
    x = as_tensor(x)
    return sub(x, logsumexp(x, axis=axis, keepdims=True))


def logsumexp(x, axis=-1, keepdims=False):
    x = as_tensor(x)
    shift = np.max(x.data, axis=axis, keepdims=True)
    s = log(tsum(exp(sub(x, shift)), axis=_pos_axis(axis, x.data.ndim), keepdims=True))
    s = s + shift
    if not keepdims:
        from .tensor import reshape

        target = list(x.data.shape)
        del target[_pos_axis(axis, x.data.ndim)]
        s = reshape(s, tuple(target))
    return s


def _pos_axis(axis, ndim):
    return axis % ndim


def cross_entropy(logits, targets):
    """Mean of -log softmax(logits)[target] over the batch."""
    logits = as_tensor(logits)
    if logits.data.ndim != 2:
        raise ShapeError("cross_entropy expects [batch, classes] logits")
    n, c = logits.data.shape
    targets = np.asarray(targets, dtype=np.int64).reshape(-1)
    if targets.shape[0] != n:
        raise ShapeError("cross_entropy: one target per row required")
    if targets.min() < 0 or targets.max() >= c:
        raise IndexError("cross_entropy: target index out of range")
    lse = logsumexp(logits, axis=1)
    picked = _gather_rows(logits, targets)
    return tmean(sub(lse, picked))


def _gather_rows(flat, targets):
    """Pick flat[i, targets[i]] for each row as a 1-D tensor."""
    from .tensor import _make

    idx = (np.arange(targets.shape[0]), targets)
    data = flat.data[idx]

    def bwd(g):
        full = np.zeros_like(flat.data)
        full[idx] = g
        flat._accumulate(full)

    return _make(data, (flat,), bwd)


def kl_divergence(p_logits, q_logits):
    """KL(softmax(p) || softmax(q)), summed over the last axis.

    Averaged over leading axes if present. The p branch is detached: the
    gradient flows only into ``q_logits``.
    """
    p_logits, q_logits = as_tensor(p_logits), as_tensor(q_logits)
    if p_logits.data.shape != q_logits.data.shape:
        raise ShapeError("kl_divergence: shape mismatch")
    pl = p_logits.data
    shift = pl.max(axis=-1, keepdims=True)
    pe = np.exp(pl - shift)
    p = pe / pe.sum(axis=-1, keepdims=True)
    log_p = (pl - shift) - np.log(pe.sum(axis=-1, keepdims=True))
    log_q = log_softmax(q_logits, axis=-1)
    per_dist = tsum(mul(Tensor(p), sub(Tensor(log_p), log_q)), axis=-1)
    if per_dist.data.ndim == 0:
        return per_dist
    from .tensor import reshape

    return tmean(reshape(per_dist, (-1,)))


def cosine_similarity(a, b, eps=1e-12):
    """Cosine similarity along the last axis with an epsilon-guarded norm."""
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape != b.data.shape:
        raise ShapeError("cosine_similarity: shape mismatch")
    dot = tsum(mul(a, b), axis=-1)
    na = sqrt(tsum(mul(a, a), axis=-1))
    nb = sqrt(tsum(mul(b, b), axis=-1))
    return dot / (mul(na, nb) + eps)


def mhsa(q, k, v, heads, w_out, b_out=None):
    """Multi-head scaled dot-product attention with output projection.

    ``q`` is [Tq, D], ``k``/``v`` are [Tk, D]; D must be divisible by
    ``heads``. Per-head attention outputs are concatenated and projected
    through ``w_out`` ([D, D]).
    """
    q, k, v = as_tensor(q), as_tensor(k), as_tensor(v)
    d = q.data.shape[-1]
    if d % heads != 0:
        raise ShapeError(f"mhsa: model dim {d} not divisible by {heads} heads")
    if k.data.shape != v.data.shape or k.data.shape[-1] != d:
        raise ShapeError("mhsa: key/value shape mismatch")
    dh = d // heads
    scale = 1.0 / math.sqrt(dh)
    outs = []
    for h in range(heads):
        sl = slice(h * dh, (h + 1) * dh)
        qs, ks, vs = q[:, sl], k[:, sl], v[:, sl]
        att = softmax(mul(matmul(qs, transpose(ks)), scale), axis=-1)
        outs.append(matmul(att, vs))
    return linear(concat(outs, axis=1), w_out, b_out)


def attention_weights(q, k, heads):
    """Row-stochastic per-head attention matrices (forward only)."""
    q, k = np.asarray(as_tensor(q).data), np.asarray(as_tensor(k).data)
    d = q.shape[-1]
    dh = d // heads
    out = []
    for h in range(heads):
        sl = slice(h * dh, (h + 1) * dh)
        logits = q[:, sl] @ k[:, sl].T / math.sqrt(dh)
        logits -= logits.max(axis=-1, keepdims=True)
        e = np.exp(logits)
        out.append(e / e.sum(axis=-1, keepdims=True))
    return np.stack(out, axis=0)


def attention_block(x, kv, p, prefix, heads):
    """One residual attention layer: x + MHSA(xWq, kvWk, kvWv)Wo."""
    q = linear(x, p[f"{prefix}.wq"], p[f"{prefix}.bq"])
    k = linear(kv, p[f"{prefix}.wk"], p[f"{prefix}.bk"])
    v = linear(kv, p[f"{prefix}.wv"], p[f"{prefix}.bv"])
    return x + mhsa(q, k, v, heads, p[f"{prefix}.wo"], p[f"{prefix}.bo"])
