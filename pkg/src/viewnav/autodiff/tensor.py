"""Reverse-mode autodiff over dense float64 numpy arrays.

A ``Tape`` context records the operation graph; without an active tape all
ops are plain forward numpy evaluation (reentrant, no bookkeeping).
``Tape.backward`` accumulates gradients in reverse topological order.
"""

import threading

import numpy as np


class ShapeError(ValueError):
    """Raised when operand shapes do not agree."""


class GradCheckError(RuntimeError):
    """Raised when a gradient check encounters non-finite values."""


_STATE = threading.local()


def _active_tape():
    return getattr(_STATE, "tape", None)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "trainable", "_parents", "_bwd")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self.trainable = False
        self._parents = ()
        self._bwd = None

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        return float(self.data)

    def detach(self):
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, grad):
        # frozen leaves and plain constants stay out of the reverse pass
        if not self.requires_grad and self._bwd is None:
            return
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64)
        else:
            self.grad = self.grad + grad

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # operator sugar; constants are wrapped on the fly
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __getitem__(self, key):
        return _slice(self, key)


class Tape:
    """Records created graph nodes so a loss can be backpropagated.

    The reverse pass visits each node exactly once in reverse topological
    order. ``zero()`` clears all gradients touched by the last backward so
    the same tape can be replayed.
    """

    def __init__(self):
        self._topo = None

    def __enter__(self):
        if _active_tape() is not None:
            raise RuntimeError("tapes do not nest")
        _STATE.tape = self
        return self

    def __exit__(self, exc_type, exc, tb):
        _STATE.tape = None
        return False

    def backward(self, loss):
        if loss.data.shape != ():
            raise ShapeError("backward expects a scalar loss")
        topo = []
        seen = set()
        stack = [(loss, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self._topo = topo
        loss._accumulate(np.float64(1.0))
        for node in reversed(topo):
            if node._bwd is not None and node.grad is not None:
                node._bwd(node.grad)

    def zero(self):
        if self._topo is not None:
            for node in self._topo:
                node.grad = None


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _make(data, parents, bwd):
    out = Tensor(data)
    if _active_tape() is not None and any(
        p.requires_grad or p._parents for p in parents
    ):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._bwd = bwd
    return out


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    data = a.data + b.data

    def bwd(g):
        a._accumulate(_unbroadcast(g, a.data.shape))
        b._accumulate(_unbroadcast(g, b.data.shape))

    return _make(data, (a, b), bwd)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    data = a.data - b.data

    def bwd(g):
        a._accumulate(_unbroadcast(g, a.data.shape))
        b._accumulate(_unbroadcast(-g, b.data.shape))

    return _make(data, (a, b), bwd)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    data = a.data * b.data

    def bwd(g):
        a._accumulate(_unbroadcast(g * b.data, a.data.shape))
        b._accumulate(_unbroadcast(g * a.data, b.data.shape))

    return _make(data, (a, b), bwd)


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    data = a.data / b.data

    def bwd(g):
        a._accumulate(_unbroadcast(g / b.data, a.data.shape))
        b._accumulate(_unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

    return _make(data, (a, b), bwd)


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(
            f"matmul shape mismatch: {a.data.shape} @ {b.data.shape}"
        )
    data = a.data @ b.data

    def bwd(g):
        a._accumulate(g @ b.data.T)
        b._accumulate(a.data.T @ g)

    return _make(data, (a, b), bwd)


def transpose(a):
    a = as_tensor(a)

    def bwd(g):
        a._accumulate(g.T)

    return _make(a.data.T, (a,), bwd)


def reshape(a, shape):
    a = as_tensor(a)

    def bwd(g):
        a._accumulate(g.reshape(a.data.shape))

    return _make(a.data.reshape(shape), (a,), bwd)


def _slice(a, key):
    a = as_tensor(a)
    data = a.data[key]

    def bwd(g):
        full = np.zeros_like(a.data)
        full[key] = g
        a._accumulate(full)

    return _make(data, (a,), bwd)


def index_select(a, axis, indices):
    a = as_tensor(a)
    indices = np.asarray(indices)
    data = np.take(a.data, indices, axis=axis)

    def bwd(g):
        full = np.zeros_like(a.data)
        np.add.at(full, _take_key(axis, indices, a.data.ndim), g)
        a._accumulate(full)

    return _make(data, (a,), bwd)


def _take_key(axis, indices, ndim):
    key = [slice(None)] * ndim
    key[axis] = indices
    return tuple(key)


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def bwd(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            key = [slice(None)] * g.ndim
            key[axis] = slice(lo, hi)
            t._accumulate(g[tuple(key)])

    return _make(data, tuple(tensors), bwd)


def stack(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    data = np.stack([t.data for t in tensors], axis=axis)

    def bwd(g):
        for i, t in enumerate(tensors):
            t._accumulate(np.take(g, i, axis=axis))

    return _make(data, tuple(tensors), bwd)


def tsum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def bwd(g):
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.data.shape))
        else:
            if not keepdims:
                g = np.expand_dims(g, axis)
            a._accumulate(np.broadcast_to(g, a.data.shape))

    return _make(data, (a,), bwd)


def tmean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    count = a.data.size if axis is None else a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def exp(a):
    a = as_tensor(a)
    data = np.exp(a.data)

    def bwd(g):
        a._accumulate(g * data)

    return _make(data, (a,), bwd)


def log(a):
    a = as_tensor(a)

    def bwd(g):
        a._accumulate(g / a.data)

    return _make(np.log(a.data), (a,), bwd)


def tanh(a):
    a = as_tensor(a)
    data = np.tanh(a.data)

    def bwd(g):
        a._accumulate(g * (1.0 - data * data))

    return _make(data, (a,), bwd)


def sqrt(a):
    a = as_tensor(a)
    data = np.sqrt(a.data)

    def bwd(g):
        a._accumulate(g * 0.5 / data)

    return _make(data, (a,), bwd)
