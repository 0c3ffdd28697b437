"""Plain-text parameter snapshots.

Layout::

    hrsglab-params 1 <n_arrays>
    <name> <ndim> <dim0> <dim1> ...
    <row-major values, space separated, repr precision>
    ...

``repr`` of a float64 round-trips exactly, so save/load is lossless.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

MAGIC = "hrsglab-params"
VERSION = 1


def save_arrays(path, arrays: dict[str, np.ndarray]) -> None:
    lines = [f"{MAGIC} {VERSION} {len(arrays)}"]
    for name, arr in arrays.items():
        if any(c.isspace() for c in name):
            raise ValueError(f"array name {name!r} contains whitespace")
        a = np.asarray(arr, dtype=float)
        lines.append(" ".join([name, str(a.ndim), *map(str, a.shape)]))
        lines.append(" ".join(repr(float(v)) for v in a.ravel()))
    Path(path).write_text("\n".join(lines) + "\n")


def load_arrays(path) -> dict[str, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    head = lines[0].split()
    if len(head) != 3 or head[0] != MAGIC:
        raise ValueError(f"{path}: not a parameter snapshot")
    if int(head[1]) != VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {head[1]}")
    n = int(head[2])
    out = {}
    for k in range(n):
        meta = lines[1 + 2 * k].split()
        name, ndim = meta[0], int(meta[1])
        shape = tuple(int(s) for s in meta[2:2 + ndim])
        body = lines[2 + 2 * k].split()
        vals = np.array([float(v) for v in body], dtype=float)
        if vals.size != int(np.prod(shape)):
            raise ValueError(f"{path}: array {name} has {vals.size} values for shape {shape}")
        out[name] = vals.reshape(shape)
    return out
