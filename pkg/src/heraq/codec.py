"""Bit-budget accounting and bit-exact artifact serialization.

The accountant answers "how many bits does this configuration store" for both
codecs so methods can be compared at matched budgets.  Storage has three parts:
codebooks (float32 centroids), codes (packed centroid indices), and for the
hierarchical codec the per-level orientation maps at one bit per pair per
column.

Per-code bit cost is a named policy.  The default ``ceil-log2`` charges
ceil(log2 K_s) bits per code, which is what the file format actually packs.
A ``literal`` policy charging (K_s - 1) * ceil(log2 K_s) per code is kept for
sensitivity checks; it is deliberately pessimistic and never used by the
serializer.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from ._kernels import pack_bits, unpack_bits
from .quantizer import FeatureMap, HeraArtifact, PqArtifact

_ARTIFACT_MAGIC = b"HERQ"
_ARTIFACT_VERSION = 1
_METHOD_PQ = 0
_METHOD_HERA = 1
# magic, version, method, levels, M, K_s, N, D, crc32(payload)
_ARTIFACT_HEADER = struct.Struct("<4sIBBHIQQI")
_ALIGN = 8


class ArtifactFormatError(ValueError):
    """Raised when an artifact file is malformed, truncated, or corrupt."""


class InfeasibleBudgetError(ValueError):
    """Raised when no K_s >= 1 fits the requested budget."""


def code_index_bits(ks: int) -> int:
    """Bits per stored code for K_s centroids: ceil(log2 K_s), 0 for K_s=1."""
    if ks < 1:
        raise ValueError(f"K_s must be >= 1, got {ks}")
    return (ks - 1).bit_length()


def _code_bits_ceil_log2(n: int, m: int, ks: int) -> int:
    return n * m * code_index_bits(ks)


def _code_bits_literal(n: int, m: int, ks: int) -> int:
    return n * m * (ks - 1) * code_index_bits(ks)


CODE_BITS_POLICIES = {
    "ceil-log2": _code_bits_ceil_log2,
    "literal": _code_bits_literal,
}


@dataclass(frozen=True)
class BitBudget:
    total_bits: int
    codebook_bits: int
    code_bits: int
    feature_map_bits: int

    def __post_init__(self):
        parts = self.codebook_bits + self.code_bits + self.feature_map_bits
        if parts > self.total_bits:
            raise ValueError(
                f"component bits ({parts}) exceed total_bits ({self.total_bits})"
            )


def _check_counts(**counts):
    for name, value in counts.items():
        if value < 1:
            raise ValueError(f"{name} must be >= 1, got {value}")


def account_pq(n: int, d: int, m: int, ks: int, policy: str = "ceil-log2") -> BitBudget:
    """Bits stored by plain PQ: K_s*D*32 codebook + per-code bits, no maps."""
    _check_counts(n=n, d=d, m=m, ks=ks)
    codebook = ks * d * 32
    code = CODE_BITS_POLICIES[policy](n, m, ks)
    return BitBudget(
        total_bits=codebook + code,
        codebook_bits=codebook,
        code_bits=code,
        feature_map_bits=0,
    )


def account_hera(
    n: int, d: int, m: int, ks: int, levels: int, policy: str = "ceil-log2"
) -> BitBudget:
    """Bits stored by the hierarchical codec at ``levels`` rounds.

    Each of the 2^levels leaves carries its own codebooks; codes cover the same
    N rows as plain PQ; orientation maps cost N*D/2 bits per level (each level
    records one bit per column for every surviving row pair, and the pair count
    halves exactly as the sub-matrix count doubles).
    """
    _check_counts(n=n, d=d, m=m, ks=ks)
    if levels < 0:
        raise ValueError(f"levels must be >= 0, got {levels}")
    if levels and n % (1 << levels) != 0:
        raise ValueError(f"n ({n}) not divisible by 2^levels ({1 << levels})")
    codebook = (1 << levels) * ks * d * 32
    code = CODE_BITS_POLICIES[policy](n, m, ks)
    fm = levels * n * d // 2
    return BitBudget(
        total_bits=codebook + code + fm,
        codebook_bits=codebook,
        code_bits=code,
        feature_map_bits=fm,
    )


def match_budget(
    baseline: BitBudget,
    n: int,
    d: int,
    m: int,
    levels: int,
    charge_feature_maps: bool = True,
    policy: str = "ceil-log2",
) -> int:
    """Largest K_s whose hierarchical account fits inside ``baseline.total_bits``.

    With ``charge_feature_maps`` off, orientation-map bits are excluded from
    the comparison (they are still stored; the flag only changes what counts
    against the budget).  Raises InfeasibleBudgetError if even K_s=1 busts it.
    """
    _check_counts(n=n, d=d, m=m)

    def charged(ks: int) -> int:
        budget = account_hera(n, d, m, ks, levels, policy=policy)
        if charge_feature_maps:
            return budget.total_bits
        return budget.total_bits - budget.feature_map_bits

    if charged(1) > baseline.total_bits:
        raise InfeasibleBudgetError(
            f"budget {baseline.total_bits} bits cannot hold even K_s=1 "
            f"at levels={levels} on {n}x{d}"
        )
    # codebook bits alone are (2^levels)*ks*d*32, so ks is bounded by the budget
    hi = max(1, baseline.total_bits // ((1 << levels) * d * 32))
    lo = 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if charged(mid) <= baseline.total_bits:
            lo = mid
        else:
            hi = mid - 1
    return lo


# ---------------------------------------------------------------------------
# artifact files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArtifactFileInfo:
    """What a save produced: header fields plus byte counts, for size audits."""

    method: int
    levels: int
    num_subspaces: int
    ks: int
    n: int
    d: int
    payload_bytes: int
    file_bytes: int
    crc32: int


def _padded(nbytes: int) -> int:
    return (nbytes + _ALIGN - 1) // _ALIGN * _ALIGN


def payload_layout(n: int, d: int, m: int, ks: int, levels: int):
    """Per-section (exact bits, padded bytes) derived from header fields alone.

    Sections appear in file order: codebooks, codes, feature maps.  Padded
    sizes round each section up to 8-byte alignment.
    """
    leaves = 1 << levels
    codebook_bits = leaves * ks * d * 32
    code_bits = n * m * code_index_bits(ks)
    fm_bits = levels * n * d // 2
    sections = []
    for bits in (codebook_bits, code_bits, fm_bits):
        sections.append((bits, _padded((bits + 7) // 8)))
    return sections


def _pad_section(blob: bytes) -> bytes:
    return blob + b"\x00" * (_padded(len(blob)) - len(blob))


def save_artifact(artifact, path) -> ArtifactFileInfo:
    """Serialize a quantization artifact to ``path``.

    Codes are packed at ceil(log2 K_s) bits each and orientation maps at one
    bit each, little-endian throughout, each section zero-padded to 8-byte
    alignment, with a crc32 over the whole payload in the header.
    """
    if isinstance(artifact, PqArtifact):
        method = _METHOD_PQ
        levels = 0
        leaf_artifacts = (artifact,)
        feature_maps = ()
        n, d = artifact.shape
    elif isinstance(artifact, HeraArtifact):
        method = _METHOD_HERA
        levels = artifact.levels
        leaf_artifacts = artifact.leaf_artifacts
        feature_maps = artifact.feature_maps
        n, d = artifact.shape
    else:
        raise TypeError(f"not a quantization artifact: {type(artifact).__name__}")

    mm = leaf_artifacts[0].num_subspaces
    ks = leaf_artifacts[0].centroids_per_subspace
    for leaf in leaf_artifacts:
        if leaf.num_subspaces != mm or leaf.centroids_per_subspace != ks:
            raise ValueError("leaves disagree on subspace count or K_s")
        if leaf.codes.size and int(leaf.codes.max()) >= ks:
            raise ValueError(f"code out of range for K_s={ks}")

    codebook_blob = b"".join(
        np.ascontiguousarray(leaf.codebooks, dtype="<f4").tobytes()
        for leaf in leaf_artifacts
    )
    all_codes = np.concatenate(
        [leaf.codes.astype(np.uint64).ravel() for leaf in leaf_artifacts]
    )
    code_blob = pack_bits(all_codes, code_index_bits(ks)).tobytes()
    fm_values = [
        fm.bits.astype(np.uint64).ravel()
        for level_maps in feature_maps
        for fm in level_maps
    ]
    if fm_values:
        fm_blob = pack_bits(np.concatenate(fm_values), 1).tobytes()
    else:
        fm_blob = b""

    payload = _pad_section(codebook_blob) + _pad_section(code_blob) + _pad_section(fm_blob)
    crc = zlib.crc32(payload) & 0xFFFFFFFF
    header = _ARTIFACT_HEADER.pack(
        _ARTIFACT_MAGIC, _ARTIFACT_VERSION, method, levels, mm, ks, n, d, crc
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    return ArtifactFileInfo(
        method=method,
        levels=levels,
        num_subspaces=mm,
        ks=ks,
        n=n,
        d=d,
        payload_bytes=len(payload),
        file_bytes=_ARTIFACT_HEADER.size + len(payload),
        crc32=crc,
    )


def load_artifact(path):
    """Read an artifact written by :func:`save_artifact`.

    Returns a PqArtifact or HeraArtifact whose dequantization is bit-identical
    to the original's.  Corruption anywhere in the payload fails the checksum.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _ARTIFACT_HEADER.size:
        raise ArtifactFormatError(f"{path}: file shorter than header")
    magic, version, method, levels, mm, ks, n, d, crc = _ARTIFACT_HEADER.unpack_from(raw)
    if magic != _ARTIFACT_MAGIC:
        raise ArtifactFormatError(f"{path}: bad magic {magic!r}")
    if version != _ARTIFACT_VERSION:
        raise ArtifactFormatError(f"{path}: unsupported version {version}")
    if method not in (_METHOD_PQ, _METHOD_HERA):
        raise ArtifactFormatError(f"{path}: unknown method tag {method}")
    if method == _METHOD_PQ and levels != 0:
        raise ArtifactFormatError(f"{path}: PQ artifact with levels={levels}")
    if n < 1 or d < 1 or mm < 1 or ks < 1:
        raise ArtifactFormatError(f"{path}: invalid header counts")
    if d % mm != 0:
        raise ArtifactFormatError(f"{path}: D={d} not divisible by M={mm}")
    leaves = 1 << levels
    if n % leaves != 0:
        raise ArtifactFormatError(f"{path}: N={n} not divisible by 2^levels")
    leaf_rows = n // leaves
    if leaf_rows < 1:
        raise ArtifactFormatError(f"{path}: empty leaves at levels={levels}")

    sections = payload_layout(n, d, mm, ks, levels)
    payload = raw[_ARTIFACT_HEADER.size :]
    if len(payload) != sum(padded for _, padded in sections):
        raise ArtifactFormatError(
            f"{path}: payload is {len(payload)} bytes, header implies "
            f"{sum(p for _, p in sections)}"
        )
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise ArtifactFormatError(f"{path}: payload checksum mismatch")

    offset = 0
    blobs = []
    for bits, padded in sections:
        blobs.append(payload[offset : offset + (bits + 7) // 8])
        offset += padded
    codebook_blob, code_blob, fm_blob = blobs

    width = d // mm
    codebooks = np.frombuffer(codebook_blob, dtype="<f4").reshape(
        leaves, mm, ks, width
    )
    code_values = unpack_bits(
        np.frombuffer(code_blob, dtype=np.uint8), code_index_bits(ks), n * mm
    )
    if code_values.size and int(code_values.max()) >= ks:
        raise ArtifactFormatError(f"{path}: decoded code out of range for K_s={ks}")
    codes = code_values.astype(np.uint32).reshape(leaves, leaf_rows, mm)

    leaf_artifacts = tuple(
        PqArtifact(
            codebooks=np.ascontiguousarray(codebooks[i], dtype=np.float32),
            codes=np.ascontiguousarray(codes[i]),
            shape=(leaf_rows, d),
        )
        for i in range(leaves)
    )
    if method == _METHOD_PQ:
        return leaf_artifacts[0]

    fm_bit_count = levels * n * d // 2
    fm_flat = unpack_bits(
        np.frombuffer(fm_blob, dtype=np.uint8), 1, fm_bit_count
    ).astype(np.bool_)
    feature_maps = []
    pos = 0
    for level in range(1, levels + 1):
        rows = n >> level
        level_maps = []
        for _ in range(1 << (level - 1)):
            bits = fm_flat[pos : pos + rows * d].reshape(rows, d)
            level_maps.append(FeatureMap(level=level, bits=np.ascontiguousarray(bits)))
            pos += rows * d
        feature_maps.append(tuple(level_maps))
    return HeraArtifact(
        levels=levels,
        feature_maps=tuple(feature_maps),
        leaf_artifacts=leaf_artifacts,
        shape=(n, d),
    )
