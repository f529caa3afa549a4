"""Dense float32 matrices: validation, seeded truncated-normal generation,
row-pair routing helpers, and a small binary dataset format."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ._kernels import pair_merge

_DATASET_MAGIC = b"HERM"
_DATASET_VERSION = 1
_DATASET_HEADER = struct.Struct("<4sIQQ")


class DatasetFormatError(ValueError):
    """Raised when a dataset file is malformed or truncated."""


def as_matrix(x) -> np.ndarray:
    """Coerce ``x`` to a C-contiguous float32 2-D array with at least one row
    and one column."""
    m = np.ascontiguousarray(x, dtype=np.float32)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"matrix must be at least 1x1, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class TruncNormalSpec:
    """Parameters of a truncated normal distribution on an open interval."""

    mean: float = 0.5
    stddev: float = 0.16
    lower: float = 0.0
    upper: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.stddev > 0:
            raise ValueError(f"stddev must be positive, got {self.stddev}")
        if not self.lower < self.upper:
            raise ValueError(
                f"need lower < upper, got [{self.lower}, {self.upper}]"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")


def generate_truncated_normal(
    spec: TruncNormalSpec, rows: int, cols: int
) -> np.ndarray:
    """Sample a rows x cols float32 matrix from the truncated normal given by
    ``spec``.

    Rejection sampling from the parent normal: draw, cast to float32, keep
    values strictly inside (lower, upper).  Filtering after the cast makes the
    open-interval guarantee hold for the stored float32 values, not just the
    float64 draws.  The generator is numpy's default PCG64 seeded from
    ``spec.seed``, so identical inputs reproduce bit-identical matrices.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"rows and cols must be >= 1, got {rows}x{cols}")
    need = rows * cols
    rng = np.random.default_rng(spec.seed)
    chunks = []
    got = 0
    while got < need:
        draw = rng.normal(spec.mean, spec.stddev, size=need - got).astype(np.float32)
        keep = draw[(draw > spec.lower) & (draw < spec.upper)]
        chunks.append(keep)
        got += keep.size
    flat = np.concatenate(chunks)[:need]
    return flat.reshape(rows, cols)


def split_rows_by_mask(m, mask) -> tuple[np.ndarray, np.ndarray]:
    """Route each row pair (2i, 2i+1) of ``m`` into two half-height matrices.

    Where ``mask[i, j]`` is set, element (2i, j) goes to the first output and
    (2i+1, j) to the second; where clear, the routing is swapped.  With the
    orientation bitmap produced by the pair-split transform this yields the
    (small, big) halves.
    """
    m = as_matrix(m)
    if m.shape[0] % 2 != 0:
        raise ValueError(f"row count must be even, got {m.shape[0]}")
    mask = np.ascontiguousarray(mask, dtype=np.bool_)
    want = (m.shape[0] // 2, m.shape[1])
    if mask.shape != want:
        raise ValueError(f"mask shape {mask.shape} does not match {want}")
    first = m[0::2]
    second = m[1::2]
    lo = np.where(mask, first, second)
    hi = np.where(mask, second, first)
    return np.ascontiguousarray(lo), np.ascontiguousarray(hi)


def merge_rows_by_mask(lo, hi, mask) -> np.ndarray:
    """Inverse of :func:`split_rows_by_mask`: interleave the halves back into
    row pairs under the same routing bitmap."""
    return pair_merge(as_matrix(lo), as_matrix(hi), mask)


def save_matrix(m, path) -> None:
    """Write ``m`` to ``path`` as little-endian binary: magic, version, row and
    column counts, then row-major float32 data."""
    m = as_matrix(m)
    header = _DATASET_HEADER.pack(
        _DATASET_MAGIC, _DATASET_VERSION, m.shape[0], m.shape[1]
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(m.astype("<f4", copy=False).tobytes())


def load_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`save_matrix`."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _DATASET_HEADER.size:
        raise DatasetFormatError(f"{path}: file shorter than header")
    magic, version, rows, cols = _DATASET_HEADER.unpack_from(raw)
    if magic != _DATASET_MAGIC:
        raise DatasetFormatError(f"{path}: bad magic {magic!r}")
    if version != _DATASET_VERSION:
        raise DatasetFormatError(f"{path}: unsupported version {version}")
    if rows < 1 or cols < 1:
        raise DatasetFormatError(f"{path}: invalid shape {rows}x{cols}")
    expect = _DATASET_HEADER.size + rows * cols * 4
    if len(raw) != expect:
        raise DatasetFormatError(
            f"{path}: expected {expect} bytes for {rows}x{cols}, got {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=_DATASET_HEADER.size)
    return np.ascontiguousarray(data.reshape(rows, cols).astype(np.float32))
