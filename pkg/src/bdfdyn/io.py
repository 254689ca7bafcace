"""Binary checkpoints of kernel operators and CSV diagnostics."""

from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import LatticeMismatchError
from .lattice import MomentumLattice, build_lattice
from .opspace import KernelOperator

__all__ = ["MAGIC", "VERSION", "write_checkpoint", "read_checkpoint", "write_csv", "format_value"]

MAGIC = b"BDFQ"
VERSION = 1
# magic, version, cutoff, n_per_axis, block count
_HEADER = struct.Struct("<4sIdIQ")


def write_checkpoint(path, q: KernelOperator) -> None:
    """Header then the (N, N, 4, 4) kernel blocks as little-endian interleaved float64."""
    lat = q.lattice
    blocks = np.ascontiguousarray(q.blocks, dtype="<c16")
    header = _HEADER.pack(MAGIC, VERSION, float(lat.cutoff), int(lat.n_per_axis), lat.size * lat.size)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(blocks.tobytes())


def read_checkpoint(path, lattice: MomentumLattice | None = None) -> KernelOperator:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated checkpoint header")
    magic, version, cutoff, n, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a checkpoint (bad magic {magic!r})")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    if lattice is None:
        lattice = build_lattice(cutoff, n)
    elif lattice.cutoff != cutoff or lattice.n_per_axis != n:
        raise LatticeMismatchError(f"{path}: checkpoint lattice ({cutoff}, {n}) differs from the requested one")
    if count != lattice.size**2:
        raise ValueError(f"{path}: block count {count} does not match the lattice")
    payload = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
    if payload.size != count * 16:
        raise ValueError(f"{path}: expected {count * 16} complex entries, found {payload.size}")
    blocks = payload.reshape(lattice.size, lattice.size, 4, 4).astype(complex)
    return KernelOperator.from_blocks(lattice, blocks)


def format_value(x: float) -> str:
    return repr(float(x))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_value(x) for x in row])
