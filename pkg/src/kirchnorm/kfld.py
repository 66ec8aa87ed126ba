"""KFLD binary field files.

Layout (little-endian): b"KFLD", u8 version (=1), u8 dim, u64 M, f64 half_width,
then M**dim float64 samples in row-major order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import Field, make_grid

MAGIC = b"KFLD"
VERSION = 1
_HEADER = struct.Struct("<4sBBQd")


def dumps(u: Field) -> bytes:
    g = u.grid
    head = _HEADER.pack(MAGIC, VERSION, g.dim, g.points_per_dim, g.half_width)
    return head + np.ascontiguousarray(u.samples, dtype="<f8").tobytes(order="C")


def loads(blob: bytes, **grid_options) -> Field:
    if len(blob) < _HEADER.size:
        raise ValueError("KFLD: truncated header")
    magic, version, dim, m, half_width = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ValueError(f"KFLD: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"KFLD: unsupported version {version}")
    grid = make_grid(dim, half_width, m, **grid_options)
    payload = blob[_HEADER.size:]
    if len(payload) != 8 * grid.size:
        raise ValueError(f"KFLD: expected {8 * grid.size} payload bytes, got {len(payload)}")
    samples = np.frombuffer(payload, dtype="<f8").reshape(grid.shape)
    return Field(grid, samples)


def write(path, u: Field) -> None:
    Path(path).write_bytes(dumps(u))


def read(path, **grid_options) -> Field:
    return loads(Path(path).read_bytes(), **grid_options)
