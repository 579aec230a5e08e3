"""Precomputed feature-map files.

Binary layout, little-endian throughout:

    magic   4 bytes  b"OPCF"
    version u32      currently 1
    count   u32      number of records
    then per record:
        id_len  u16
        id      id_len bytes of UTF-8 (the image reference)
        shape   3 x u32  (C, H, W)
        data    C*H*W float32 values, C-order

Used to feed a fixed external backbone's maps through the encoder hook.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"OPCF"
VERSION = 1


def write_feature_file(path, features: dict[str, np.ndarray]) -> None:
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(features)))
        for key in sorted(features):
            arr = np.ascontiguousarray(features[key], dtype="<f4")
            if arr.ndim != 3:
                raise ValueError(f"feature map for {key!r} must be (C, H, W), got {arr.shape}")
            ident = key.encode("utf-8")
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(struct.pack("<III", *arr.shape))
            fh.write(arr.tobytes())


def read_feature_file(path) -> dict[str, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a feature file (bad magic)")
    version, count = struct.unpack_from("<II", raw, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported feature-file version {version}")
    out: dict[str, np.ndarray] = {}
    off = 12
    for _ in range(count):
        (id_len,) = struct.unpack_from("<H", raw, off)
        off += 2
        ident = raw[off : off + id_len].decode("utf-8")
        off += id_len
        c, h, w = struct.unpack_from("<III", raw, off)
        off += 12
        n = c * h * w
        arr = np.frombuffer(raw, dtype="<f4", count=n, offset=off).reshape(c, h, w)
        off += 4 * n
        out[ident] = arr.copy()
    return out
