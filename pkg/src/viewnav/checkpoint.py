"""Self-describing binary checkpoints with bit-exact round-trips.

Layout: magic, array count, then per array (name, trainable flag, shape,
little-endian float64 data), a JSON metadata blob (kind, iteration, training
config, rng state), and a trailing CRC32 of everything after the magic.
"""

import json
import struct
import zlib
from dataclasses import asdict

import numpy as np

from .autodiff import ParamSet
from .policy import PolicyBundle
from .vilcore import VILConfig

MAGIC = b"VNCKPT01"


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, bundle, iteration=0, vil_cfg=None, rng_state=None,
                    extra=None):
    payload = bytearray()
    items = sorted(bundle.params.items())
    payload += struct.pack("<I", len(items))
    for name, tensor in items:
        raw = name.encode()
        data = np.ascontiguousarray(tensor.data, dtype="<f8")
        payload += struct.pack("<H", len(raw))
        payload += raw
        payload += struct.pack("<BB", 1 if tensor.trainable else 0, data.ndim)
        payload += struct.pack(f"<{data.ndim}Q", *data.shape)
        payload += data.tobytes()
    meta = {
        "kind": bundle.kind,
        "obs_dim": bundle.obs_dim,
        "iteration": iteration,
        "vil": asdict(vil_cfg) if vil_cfg is not None else None,
        "rng_state": rng_state,
        "extra": extra or {},
    }
    blob = json.dumps(meta, sort_keys=True).encode()
    payload += struct.pack("<I", len(blob))
    payload += blob
    crc = zlib.crc32(bytes(payload)) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(payload)
        fh.write(struct.pack("<I", crc))


def load_checkpoint(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    payload = blob[len(MAGIC):-4]
    (crc,) = struct.unpack("<I", blob[-4:])
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise CheckpointError(f"{path}: checksum mismatch")
    off = 0
    (n_arrays,) = struct.unpack_from("<I", payload, off)
    off += 4
    params = ParamSet()
    for _ in range(n_arrays):
        (name_len,) = struct.unpack_from("<H", payload, off)
        off += 2
        name = payload[off : off + name_len].decode()
        off += name_len
        trainable, ndim = struct.unpack_from("<BB", payload, off)
        off += 2
        shape = struct.unpack_from(f"<{ndim}Q", payload, off)
        off += 8 * ndim
        count = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=off).reshape(shape)
        off += 8 * count
        params.add(name, arr.copy(), trainable=bool(trainable))
    (meta_len,) = struct.unpack_from("<I", payload, off)
    off += 4
    meta = json.loads(payload[off : off + meta_len].decode())
    bundle = PolicyBundle(params=params, kind=meta["kind"], obs_dim=meta["obs_dim"])
    if meta.get("vil") is not None:
        meta["vil"] = VILConfig(**meta["vil"])
    return bundle, meta
