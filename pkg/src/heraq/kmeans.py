"""Seeded Lloyd's k-means with k-means++ initialization.

This is the codebook learner behind the quantizers.  Everything is
deterministic given the config seed: initialization draws from numpy's PCG64,
assignment ties break to the lowest centroid index, and empty clusters are
repaired by stealing the point currently farthest from its centroid (lowest
index on ties).  Distances accumulate in float64; stored centroids are float32.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import nearest_centroids
from .matrix import as_matrix


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    max_iters: int = 100
    rel_tol: float = 1e-4
    seed: int = 0
    restarts: int = 4

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.rel_tol < 0:
            raise ValueError(f"rel_tol must be >= 0, got {self.rel_tol}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")


@dataclass(frozen=True)
class KMeansResult:
    """Fitted centroids plus the final assignment and inertia.

    ``inertia_history`` holds the inertia after initialization and after each
    Lloyd iteration; it is non-increasing up to float rounding.
    """

    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    n_iters: int = 0
    inertia_history: tuple = field(default=())


def _init_plusplus(points: np.ndarray, k: int, rng) -> np.ndarray:
    """k-means++ seeding: first center uniform, the rest drawn with
    probability proportional to squared distance from the chosen set."""
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float32)
    first = int(rng.integers(n))
    centroids[0] = points[first]
    chosen = {first}
    mind = None
    for c in range(1, k):
        _, dist = nearest_centroids(points, centroids[c - 1 : c])
        mind = dist if mind is None else np.minimum(mind, dist)
        total = float(mind.sum())
        if total > 0.0:
            r = float(rng.random()) * total
            idx = int(np.searchsorted(np.cumsum(mind), r, side="right"))
            idx = min(idx, n - 1)
        else:
            # all remaining mass is zero (duplicate-heavy data); take the
            # lowest index not yet used so the run stays deterministic
            idx = next(i for i in range(n) if i not in chosen)
        centroids[c] = points[idx]
        chosen.add(idx)
    return centroids


def _update_centroids(points64, assignments, k, old_centroids):
    counts = np.bincount(assignments, minlength=k)
    sums = np.zeros((k, points64.shape[1]), dtype=np.float64)
    np.add.at(sums, assignments, points64)
    fresh = old_centroids.astype(np.float64)
    nonempty = counts > 0
    fresh[nonempty] = sums[nonempty] / counts[nonempty, None]
    return fresh.astype(np.float32), counts


def _lloyd_once(points, points64, cfg: KMeansConfig, seed: int) -> KMeansResult:
    rng = np.random.default_rng(seed)
    centroids = _init_plusplus(points, cfg.k, rng)

    assignments, mind = nearest_centroids(points, centroids)
    inertia = float(np.sum(mind))
    history = [inertia]
    iters = 0
    for _ in range(cfg.max_iters):
        centroids, counts = _update_centroids(points64, assignments, cfg.k, centroids)
        for c in np.flatnonzero(counts == 0):
            # empty cluster: seize the point farthest from its centroid
            victim = int(np.argmax(mind))
            centroids[c] = points[victim]
            mind[victim] = 0.0
        new_assignments, mind = nearest_centroids(points, centroids)
        new_inertia = float(np.sum(mind))
        iters += 1
        history.append(new_inertia)
        unchanged = bool(np.array_equal(new_assignments, assignments))
        improved = inertia - new_inertia
        assignments = new_assignments
        converged = improved < cfg.rel_tol * inertia if inertia > 0 else True
        inertia = new_inertia
        if unchanged or converged:
            break
    return KMeansResult(
        centroids=centroids,
        assignments=assignments,
        inertia=inertia,
        n_iters=iters,
        inertia_history=tuple(history),
    )


def kmeans_fit(points, cfg: KMeansConfig) -> KMeansResult:
    """Cluster ``points`` into ``cfg.k`` groups by Lloyd iteration.

    Runs ``cfg.restarts`` independent seedings (seeds ``cfg.seed + t``) and
    keeps the lowest-inertia run, the earliest on exact ties.  Each run stops
    when the relative inertia improvement drops below ``cfg.rel_tol``, when
    assignments stop changing, or after ``cfg.max_iters`` iterations.
    """
    points = as_matrix(points)
    n = points.shape[0]
    if cfg.k > n:
        raise ValueError(f"k={cfg.k} exceeds number of points ({n})")
    points64 = points.astype(np.float64)
    best = None
    for t in range(cfg.restarts):
        result = _lloyd_once(points, points64, cfg, cfg.seed + t)
        if best is None or result.inertia < best.inertia:
            best = result
        if best.inertia == 0.0:
            break
    return best


def kmeans_assign(points, centroids) -> np.ndarray:
    """Index of the nearest centroid for each point (squared Euclidean, ties
    to the lowest index)."""
    assignments, _ = nearest_centroids(as_matrix(points), as_matrix(centroids))
    return assignments
