"""Product quantization and the hierarchical pair-reordering codec on top of it.

Plain PQ splits the D columns into M equal subspaces, learns a centroid table
per subspace with k-means, and stores one centroid index per (row, subspace).

The hierarchical variant first applies a level of row-pair reordering: rows
(2i, 2i+1) are compared elementwise, the smaller element of each pair is routed
to a "small" half and the larger to a "big" half, and a 1-bit orientation map
records which way each pair went.  Repeating this on every half for L levels
yields 2^L leaf matrices whose columns are far more homogeneous than the
input's, which is exactly what per-subspace k-means likes.  PQ runs on each
leaf; dequantization reverses the recursion bottom-up using the stored maps,
so the reordering layer itself is lossless.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._kernels import pair_merge, pair_split
from .kmeans import KMeansConfig, kmeans_fit
from .matrix import as_matrix


@dataclass(frozen=True)
class PqConfig:
    num_subspaces: int
    centroids_per_subspace: int
    kmeans: KMeansConfig

    def __post_init__(self):
        if self.num_subspaces < 1:
            raise ValueError(f"num_subspaces must be >= 1, got {self.num_subspaces}")
        if self.centroids_per_subspace < 1:
            raise ValueError(
                f"centroids_per_subspace must be >= 1, got {self.centroids_per_subspace}"
            )
        if self.kmeans.k != self.centroids_per_subspace:
            raise ValueError(
                f"kmeans.k ({self.kmeans.k}) must equal centroids_per_subspace "
                f"({self.centroids_per_subspace})"
            )


def make_pq_config(
    num_subspaces: int,
    centroids_per_subspace: int,
    seed: int = 0,
    max_iters: int = 100,
    rel_tol: float = 1e-4,
    restarts: int = 4,
) -> PqConfig:
    """Convenience constructor wiring the k-means config consistently."""
    return PqConfig(
        num_subspaces=num_subspaces,
        centroids_per_subspace=centroids_per_subspace,
        kmeans=KMeansConfig(
            k=centroids_per_subspace,
            max_iters=max_iters,
            rel_tol=rel_tol,
            seed=seed,
            restarts=restarts,
        ),
    )


@dataclass(frozen=True)
class PqArtifact:
    """Learned codebooks plus per-row centroid indices.

    ``codebooks`` has shape (M, K_s, D/M) float32; ``codes`` has shape (N, M)
    with values below K_s; ``shape`` is the original (N, D).
    """

    codebooks: np.ndarray
    codes: np.ndarray
    shape: tuple

    @property
    def num_subspaces(self) -> int:
        return self.codebooks.shape[0]

    @property
    def centroids_per_subspace(self) -> int:
        return self.codebooks.shape[1]


@dataclass(frozen=True)
class FeatureMap:
    """Orientation bitmap for one pair-split of one sub-matrix.

    ``bits[i, j]`` is True iff row 2i held the strictly smaller element of the
    pair in column j; equal elements record False, treating the first element
    as the larger.
    """

    level: int
    bits: np.ndarray


@dataclass(frozen=True)
class HeraArtifact:
    """Complete compressed form: per-leaf PQ artifacts plus the orientation
    maps needed to undo the reordering.

    ``feature_maps[t-1]`` holds the 2^(t-1) maps recorded when level t split
    each then-current sub-matrix; within a level, maps follow the same
    small-to-big path order as ``leaf_artifacts``.
    """

    levels: int
    feature_maps: tuple
    leaf_artifacts: tuple
    shape: tuple


def pq_quantize(m, cfg: PqConfig) -> PqArtifact:
    """Learn per-subspace codebooks on ``m`` and encode every row.

    Subspace j is clustered with seed ``cfg.kmeans.seed + j`` so runs are
    reproducible and subspaces independent.
    """
    m = as_matrix(m)
    n, d = m.shape
    mm = cfg.num_subspaces
    ks = cfg.centroids_per_subspace
    if d % mm != 0:
        raise ValueError(f"cols ({d}) not divisible by num_subspaces ({mm})")
    if ks > n:
        raise ValueError(f"centroids_per_subspace ({ks}) exceeds rows ({n})")
    width = d // mm
    codebooks = np.empty((mm, ks, width), dtype=np.float32)
    codes = np.empty((n, mm), dtype=np.uint32)
    for j in range(mm):
        block = np.ascontiguousarray(m[:, j * width : (j + 1) * width])
        sub_cfg = replace(cfg.kmeans, seed=cfg.kmeans.seed + j)
        fit = kmeans_fit(block, sub_cfg)
        codebooks[j] = fit.centroids
        codes[:, j] = fit.assignments
    return PqArtifact(codebooks=codebooks, codes=codes, shape=(n, d))


def pq_dequantize(a: PqArtifact) -> np.ndarray:
    """Reconstruct by codebook lookup; each subspace block is bit-identical to
    the stored centroid it indexes."""
    mm, ks, width = a.codebooks.shape
    n, d = a.shape
    if a.codes.shape != (n, mm):
        raise ValueError(f"codes shape {a.codes.shape} does not match ({n}, {mm})")
    if a.codes.size and int(a.codes.max()) >= ks:
        raise ValueError(f"code {int(a.codes.max())} out of range for K_s={ks}")
    out = np.empty((n, d), dtype=np.float32)
    for j in range(mm):
        out[:, j * width : (j + 1) * width] = a.codebooks[j][a.codes[:, j]]
    return out


def hera_pair_split(m):
    """Split row pairs of ``m`` into elementwise (small, big) halves plus the
    orientation map that makes the split invertible."""
    small, big, bits = pair_split(as_matrix(m))
    return small, big, FeatureMap(level=1, bits=bits)


def _fm_bits(fm) -> np.ndarray:
    return fm.bits if isinstance(fm, FeatureMap) else fm


def hera_pair_merge(small, big, fm) -> np.ndarray:
    """Interleave (small, big) halves back into row pairs under ``fm``; exact
    inverse of :func:`hera_pair_split` on unmodified halves."""
    return pair_merge(as_matrix(small), as_matrix(big), _fm_bits(fm))


def hera_transform(m, levels: int):
    """Apply ``levels`` rounds of pair-splitting to ``m``.

    Returns (leaves, feature_maps): 2^levels sub-matrices in small-to-big path
    order, and per-level tuples of FeatureMap in the order the splits ran.
    The transform is a pure permutation of the input elements.
    """
    m = as_matrix(m)
    if levels < 0:
        raise ValueError(f"levels must be >= 0, got {levels}")
    if levels and m.shape[0] % (1 << levels) != 0:
        raise ValueError(
            f"rows ({m.shape[0]}) not divisible by 2^levels ({1 << levels})"
        )
    current = [m]
    all_maps = []
    for level in range(1, levels + 1):
        level_maps = []
        nxt = []
        for part in current:
            small, big, bits = pair_split(part)
            nxt.append(small)
            nxt.append(big)
            level_maps.append(FeatureMap(level=level, bits=bits))
        current = nxt
        all_maps.append(tuple(level_maps))
    return current, tuple(all_maps)


def hera_untransform(leaves, feature_maps) -> np.ndarray:
    """Invert :func:`hera_transform`: merge leaves bottom-up through the
    stored maps in reverse level order."""
    current = [as_matrix(leaf) for leaf in leaves]
    for level_maps in reversed(feature_maps):
        if 2 * len(level_maps) != len(current):
            raise ValueError(
                f"level with {len(level_maps)} maps cannot merge {len(current)} parts"
            )
        current = [
            pair_merge(current[2 * i], current[2 * i + 1], _fm_bits(level_maps[i]))
            for i in range(len(level_maps))
        ]
    if len(current) != 1:
        raise ValueError(f"{len(current)} parts left after merging all levels")
    return current[0]


def hera_quantize(m, levels: int, cfg: PqConfig) -> HeraArtifact:
    """Pair-split ``m`` for ``levels`` rounds, then product-quantize each of
    the 2^levels leaves independently.

    Leaf l (in path order) clusters subspace j with seed
    ``cfg.kmeans.seed + l * M + j``.  ``levels=0`` is plain PQ in a wrapper.
    """
    m = as_matrix(m)
    n = m.shape[0]
    leaf_rows = n >> levels if levels else n
    if levels and n % (1 << levels) != 0:
        raise ValueError(f"rows ({n}) not divisible by 2^levels ({1 << levels})")
    if leaf_rows < cfg.centroids_per_subspace:
        raise ValueError(
            f"leaf rows ({leaf_rows}) below centroids_per_subspace "
            f"({cfg.centroids_per_subspace}); reduce levels or K_s"
        )
    leaves, feature_maps = hera_transform(m, levels)
    artifacts = []
    for idx, leaf in enumerate(leaves):
        leaf_cfg = replace(
            cfg,
            kmeans=replace(
                cfg.kmeans, seed=cfg.kmeans.seed + idx * cfg.num_subspaces
            ),
        )
        artifacts.append(pq_quantize(leaf, leaf_cfg))
    return HeraArtifact(
        levels=levels,
        feature_maps=feature_maps,
        leaf_artifacts=tuple(artifacts),
        shape=(n, m.shape[1]),
    )


def hera_dequantize(a: HeraArtifact) -> np.ndarray:
    """Dequantize every leaf, then merge bottom-up with the stored maps."""
    if len(a.leaf_artifacts) != (1 << a.levels):
        raise ValueError(
            f"expected {1 << a.levels} leaves for levels={a.levels}, "
            f"got {len(a.leaf_artifacts)}"
        )
    if len(a.feature_maps) != a.levels:
        raise ValueError(
            f"expected {a.levels} map levels, got {len(a.feature_maps)}"
        )
    out = hera_untransform([pq_dequantize(leaf) for leaf in a.leaf_artifacts], a.feature_maps)
    if out.shape != tuple(a.shape):
        raise ValueError(f"reconstructed shape {out.shape} does not match {a.shape}")
    return out


def dequantize(a) -> np.ndarray:
    """Dispatch on artifact type."""
    if isinstance(a, HeraArtifact):
        return hera_dequantize(a)
    if isinstance(a, PqArtifact):
        return pq_dequantize(a)
    raise TypeError(f"not a quantization artifact: {type(a).__name__}")
