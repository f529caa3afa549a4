"""Hot numeric kernels, with numba-jitted and pure-numpy implementations.

The active backend is chosen once at import time from the ``HERAQ_BACKEND``
environment variable:

  * ``auto`` (default): numba if importable, numpy otherwise
  * ``numba``: require numba, fail loudly if it is missing
  * ``numpy``: force the pure-numpy fallback

Both implementations of every kernel are kept importable so tests and
``benchmarks/backend_speed.py`` can compare them directly.  The two paths are
written to produce bit-identical outputs: squared distances accumulate in
float64 in ascending dimension order, ties in nearest-centroid selection go to
the lowest index, and bit streams are packed LSB-first.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    njit = None

_REQUESTED = os.environ.get("HERAQ_BACKEND", "auto").strip().lower()
if _REQUESTED not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"HERAQ_BACKEND must be one of auto/numba/numpy, got {_REQUESTED!r}"
    )
if _REQUESTED == "numba" and njit is None:
    raise RuntimeError("HERAQ_BACKEND=numba but numba is not importable")

NUMBA_AVAILABLE = njit is not None
BACKEND = "numba" if (NUMBA_AVAILABLE and _REQUESTED != "numpy") else "numpy"


def backend_name() -> str:
    """Name of the active kernel backend, ``numba`` or ``numpy``."""
    return BACKEND


# ---------------------------------------------------------------------------
# nearest-centroid assignment
# ---------------------------------------------------------------------------

def _nearest_centroids_numpy(points, centroids):
    n = points.shape[0]
    k = centroids.shape[0]
    dists = np.zeros((n, k), dtype=np.float64)
    # accumulate one dimension at a time so the summation order matches the
    # jitted inner loop exactly
    for j in range(points.shape[1]):
        diff = points[:, j].astype(np.float64)[:, None] - centroids[:, j].astype(np.float64)[None, :]
        dists += diff * diff
    assignments = np.argmin(dists, axis=1)
    min_dists = dists[np.arange(n), assignments]
    return assignments.astype(np.int64), min_dists


if NUMBA_AVAILABLE:

    @njit(cache=True, nogil=True)
    def _nearest_centroids_numba(points, centroids):
        n, d = points.shape
        k = centroids.shape[0]
        assignments = np.empty(n, dtype=np.int64)
        min_dists = np.empty(n, dtype=np.float64)
        for i in range(n):
            best = 0
            best_d = np.inf
            for c in range(k):
                s = 0.0
                for j in range(d):
                    diff = np.float64(points[i, j]) - np.float64(centroids[c, j])
                    s += diff * diff
                if s < best_d:
                    best_d = s
                    best = c
            assignments[i] = best
            min_dists[i] = best_d
        return assignments, min_dists

else:  # pragma: no cover
    _nearest_centroids_numba = None


def nearest_centroids(points, centroids):
    """Index of the nearest centroid per point plus the squared distance to it.

    Distances are squared Euclidean, accumulated in float64; ties break to the
    lowest centroid index.
    """
    points = np.ascontiguousarray(points, dtype=np.float32)
    centroids = np.ascontiguousarray(centroids, dtype=np.float32)
    if points.shape[1] != centroids.shape[1]:
        raise ValueError(
            f"dimension mismatch: points have {points.shape[1]} columns, "
            f"centroids have {centroids.shape[1]}"
        )
    if centroids.shape[0] < 1:
        raise ValueError("need at least one centroid")
    return _NEAREST(points, centroids)


# ---------------------------------------------------------------------------
# row-pair split / merge
# ---------------------------------------------------------------------------

def _pair_split_numpy(x):
    first = x[0::2]
    second = x[1::2]
    fm = first < second
    small = np.where(fm, first, second)
    big = np.where(fm, second, first)
    return np.ascontiguousarray(small), np.ascontiguousarray(big), fm


def _pair_merge_numpy(small, big, fm):
    half, d = small.shape
    out = np.empty((2 * half, d), dtype=np.float32)
    out[0::2] = np.where(fm, small, big)
    out[1::2] = np.where(fm, big, small)
    return out


if NUMBA_AVAILABLE:

    @njit(cache=True, nogil=True)
    def _pair_split_numba(x):
        half = x.shape[0] // 2
        d = x.shape[1]
        small = np.empty((half, d), dtype=np.float32)
        big = np.empty((half, d), dtype=np.float32)
        fm = np.empty((half, d), dtype=np.bool_)
        for i in range(half):
            for j in range(d):
                a = x[2 * i, j]
                b = x[2 * i + 1, j]
                if a < b:
                    small[i, j] = a
                    big[i, j] = b
                    fm[i, j] = True
                else:
                    small[i, j] = b
                    big[i, j] = a
                    fm[i, j] = False
        return small, big, fm

    @njit(cache=True, nogil=True)
    def _pair_merge_numba(small, big, fm):
        half, d = small.shape
        out = np.empty((2 * half, d), dtype=np.float32)
        for i in range(half):
            for j in range(d):
                if fm[i, j]:
                    out[2 * i, j] = small[i, j]
                    out[2 * i + 1, j] = big[i, j]
                else:
                    out[2 * i, j] = big[i, j]
                    out[2 * i + 1, j] = small[i, j]
        return out

else:  # pragma: no cover
    _pair_split_numba = None
    _pair_merge_numba = None


def pair_split(x):
    """Split rows (2i, 2i+1) into elementwise (small, big) plus an orientation
    bitmap.  Bit is set iff the even row held the strictly smaller element;
    equal elements leave the bit clear."""
    x = np.ascontiguousarray(x, dtype=np.float32)
    if x.shape[0] % 2 != 0:
        raise ValueError(f"row count must be even, got {x.shape[0]}")
    return _PAIR_SPLIT(x)


def pair_merge(small, big, fm):
    """Inverse of :func:`pair_split` for an unmodified (small, big, fm)."""
    small = np.ascontiguousarray(small, dtype=np.float32)
    big = np.ascontiguousarray(big, dtype=np.float32)
    fm = np.ascontiguousarray(fm, dtype=np.bool_)
    if small.shape != big.shape or small.shape != fm.shape:
        raise ValueError(
            f"shape mismatch: small {small.shape}, big {big.shape}, bitmap {fm.shape}"
        )
    return _PAIR_MERGE(small, big, fm)


# ---------------------------------------------------------------------------
# bit packing (LSB-first contiguous stream)
# ---------------------------------------------------------------------------

def _pack_bits_numpy(values, width):
    shifts = np.arange(width, dtype=np.uint64)
    bits = ((values[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bits.ravel(), bitorder="little")


def _unpack_bits_numpy(data, width, count):
    bits = np.unpackbits(data, bitorder="little")[: count * width]
    shifts = np.arange(width, dtype=np.uint64)
    groups = bits.reshape(count, width).astype(np.uint64)
    return (groups << shifts).sum(axis=1, dtype=np.uint64)


if NUMBA_AVAILABLE:

    @njit(cache=True, nogil=True)
    def _pack_bits_numba(values, width):
        count = values.shape[0]
        out = np.zeros((count * width + 7) // 8, dtype=np.uint8)
        acc = np.int64(0)
        nbits = 0
        pos = 0
        for i in range(count):
            acc |= np.int64(values[i]) << nbits
            nbits += width
            while nbits >= 8:
                out[pos] = np.uint8(acc & 0xFF)
                acc >>= 8
                nbits -= 8
                pos += 1
        if nbits > 0:
            out[pos] = np.uint8(acc & 0xFF)
        return out

    @njit(cache=True, nogil=True)
    def _unpack_bits_numba(data, width, count):
        out = np.empty(count, dtype=np.uint64)
        mask = (np.int64(1) << width) - 1
        acc = np.int64(0)
        nbits = 0
        pos = 0
        for i in range(count):
            while nbits < width:
                acc |= np.int64(data[pos]) << nbits
                pos += 1
                nbits += 8
            out[i] = np.uint64(acc & mask)
            acc >>= width
            nbits -= width
        return out

else:  # pragma: no cover
    _pack_bits_numba = None
    _unpack_bits_numba = None


def pack_bits(values, width):
    """Pack unsigned integers into a byte stream at ``width`` bits each,
    LSB-first.  ``width`` up to 32; trailing slack bits in the last byte are
    zero."""
    values = np.ascontiguousarray(values, dtype=np.uint64).ravel()
    if width == 0:
        if values.size and values.max() != 0:
            raise ValueError("nonzero value cannot be packed at width 0")
        return np.zeros(0, dtype=np.uint8)
    if not 0 < width <= 32:
        raise ValueError(f"width must be in 1..32, got {width}")
    if values.size and int(values.max()) >> width:
        raise ValueError(f"value {int(values.max())} does not fit in {width} bits")
    if values.size == 0:
        return np.zeros(0, dtype=np.uint8)
    return _PACK_BITS(values, width)


def unpack_bits(data, width, count):
    """Inverse of :func:`pack_bits`: read ``count`` values of ``width`` bits."""
    data = np.ascontiguousarray(data, dtype=np.uint8)
    if width == 0:
        return np.zeros(count, dtype=np.uint64)
    if not 0 < width <= 32:
        raise ValueError(f"width must be in 1..32, got {width}")
    if count == 0:
        return np.zeros(0, dtype=np.uint64)
    if data.size * 8 < count * width:
        raise ValueError(
            f"stream of {data.size} bytes too short for {count} values of {width} bits"
        )
    return _UNPACK_BITS(data, width, count)


if BACKEND == "numba":
    _NEAREST = _nearest_centroids_numba
    _PAIR_SPLIT = _pair_split_numba
    _PAIR_MERGE = _pair_merge_numba
    _PACK_BITS = _pack_bits_numba
    _UNPACK_BITS = _unpack_bits_numba
else:
    _NEAREST = _nearest_centroids_numpy
    _PAIR_SPLIT = _pair_split_numpy
    _PAIR_MERGE = _pair_merge_numpy
    _PACK_BITS = _pack_bits_numpy
    _UNPACK_BITS = _unpack_bits_numpy


def implementations(backend: str):
    """Raw kernel set for ``backend`` (``numba`` or ``numpy``), for
    benchmarking and equivalence tests."""
    if backend == "numpy":
        return {
            "nearest_centroids": _nearest_centroids_numpy,
            "pair_split": _pair_split_numpy,
            "pair_merge": _pair_merge_numpy,
            "pack_bits": _pack_bits_numpy,
            "unpack_bits": _unpack_bits_numpy,
        }
    if backend == "numba":
        if not NUMBA_AVAILABLE:
            raise RuntimeError("numba backend requested but numba is not importable")
        return {
            "nearest_centroids": _nearest_centroids_numba,
            "pair_split": _pair_split_numba,
            "pair_merge": _pair_merge_numba,
            "pack_bits": _pack_bits_numba,
            "unpack_bits": _unpack_bits_numba,
        }
    raise ValueError(f"unknown backend {backend!r}")
