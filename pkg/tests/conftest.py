import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_even_matrix(rng, max_rows=64, max_cols=16, divisor=2):
    """Random float32 matrix whose row count is a positive multiple of
    ``divisor``."""
    rows = int(rng.integers(1, max_rows // divisor + 1)) * divisor
    cols = int(rng.integers(1, max_cols + 1))
    return rng.normal(0.0, 1.0, size=(rows, cols)).astype(np.float32)
