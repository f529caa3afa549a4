"""Reconstruction error metrics between an original matrix and its
dequantized approximation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix import as_matrix


@dataclass(frozen=True)
class ErrorReport:
    """Elementwise error summary over an n x d pair.

    ``mre`` is None when the original contains an exact zero, which makes the
    relative error undefined; ``mae`` and ``mse`` are always computed.
    """

    mae: float
    mre: float | None
    mse: float
    n: int
    d: int


def compute_errors(original, reconstructed) -> ErrorReport:
    """MAE, MRE, and MSE between two equal-shape matrices.

    MAE = mean |x - x'|, MRE = mean(|x - x'| / x) with the signed original in
    the denominator, MSE = mean (x - x')^2.  All accumulation is float64.
    """
    original = as_matrix(original)
    reconstructed = as_matrix(reconstructed)
    if original.shape != reconstructed.shape:
        raise ValueError(
            f"shape mismatch: {original.shape} vs {reconstructed.shape}"
        )
    x = original.astype(np.float64)
    diff = x - reconstructed.astype(np.float64)
    abs_diff = np.abs(diff)
    mae = float(np.mean(abs_diff))
    mse = float(np.mean(diff * diff))
    if np.any(original == 0):
        mre = None
    else:
        mre = float(np.mean(abs_diff / x))
    return ErrorReport(
        mae=mae, mre=mre, mse=mse, n=original.shape[0], d=original.shape[1]
    )
