"""Named parameter collections with per-entry trainable flags."""

import hashlib

import numpy as np

from .tensor import Tensor


class ParamSet:
    """Ordered name -> Tensor map; frozen entries never receive updates."""

    def __init__(self):
        self._items: dict[str, Tensor] = {}

    def add(self, name, array, trainable=True):
        if name in self._items:
            raise ValueError(f"duplicate parameter name: {name}")
        t = Tensor(np.array(array, dtype=np.float64), requires_grad=trainable)
        t.trainable = trainable
        self._items[name] = t
        return t

    def __getitem__(self, name):
        return self._items[name]

    def __contains__(self, name):
        return name in self._items

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def names(self):
        return list(self._items)

    def items(self):
        return self._items.items()

    def trainable_items(self):
        return [(n, t) for n, t in self._items.items() if t.trainable]

    def set_trainable(self, name, trainable):
        t = self._items[name]
        t.trainable = trainable
        t.requires_grad = trainable

    def freeze_all(self):
        for name in self._items:
            self.set_trainable(name, False)

    def zero_grad(self):
        for t in self._items.values():
            t.grad = None

    def copy(self):
        out = ParamSet()
        for name, t in self._items.items():
            out.add(name, t.data.copy(), trainable=t.trainable)
        return out

    def merge(self, other, prefix=""):
        for name, t in other.items():
            self.add(prefix + name, t.data.copy(), trainable=t.trainable)
        return self

    def subset(self, prefix):
        """New ParamSet with entries under ``prefix`` (prefix stripped)."""
        out = ParamSet()
        for name, t in self._items.items():
            if name.startswith(prefix):
                out.add(name[len(prefix):], t.data.copy(), trainable=t.trainable)
        return out

    def checksum(self, prefix=""):
        """SHA-256 over names and raw little-endian bytes; bit-exact."""
        h = hashlib.sha256()
        for name, t in sorted(self._items.items()):
            if not name.startswith(prefix):
                continue
            h.update(name.encode())
            h.update(np.ascontiguousarray(t.data, dtype="<f8").tobytes())
        return h.hexdigest()
