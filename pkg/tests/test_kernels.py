"""Kernel-level behavior: both backends agree bit-for-bit, packing is
LSB-first, ties and edge widths behave as documented."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heraq._kernels import (
    NUMBA_AVAILABLE,
    backend_name,
    implementations,
    nearest_centroids,
    pack_bits,
    pair_merge,
    pair_split,
    unpack_bits,
)

needs_numba = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba not installed")


def test_backend_name_is_known():
    assert backend_name() in ("numba", "numpy")


def test_nearest_centroids_exact_match_and_tie():
    centroids = np.array([[0.0], [1.0], [2.0], [3.0]], dtype=np.float32)
    # point sitting exactly on centroid 3
    asg, dist = nearest_centroids(np.array([[3.0]], dtype=np.float32), centroids)
    assert asg[0] == 3
    assert dist[0] == 0.0
    # point equidistant to centroids 1 and 2 goes to the lower index
    asg, _ = nearest_centroids(np.array([[1.5]], dtype=np.float32), centroids)
    assert asg[0] == 1


def test_nearest_centroids_matches_linear_scan(rng):
    points = rng.normal(size=(100, 4)).astype(np.float32)
    centroids = rng.normal(size=(8, 4)).astype(np.float32)
    asg, dist = nearest_centroids(points, centroids)
    # independent oracle: full distance matrix in float64
    full = ((points[:, None, :].astype(np.float64)
             - centroids[None, :, :].astype(np.float64)) ** 2).sum(axis=2)
    assert np.array_equal(asg, np.argmin(full, axis=1))
    np.testing.assert_allclose(dist, full.min(axis=1), rtol=1e-12)


def test_nearest_centroids_rejects_dim_mismatch():
    with pytest.raises(ValueError):
        nearest_centroids(np.zeros((2, 3), np.float32), np.zeros((2, 4), np.float32))


def test_pair_split_orientation_goldens():
    small, big, fm = pair_split(np.array([[1.0], [2.0]], dtype=np.float32))
    assert (small[0, 0], big[0, 0], fm[0, 0]) == (1.0, 2.0, True)
    small, big, fm = pair_split(np.array([[2.0], [1.0]], dtype=np.float32))
    assert (small[0, 0], big[0, 0], fm[0, 0]) == (1.0, 2.0, False)
    # ties record False: first element treated as the larger
    small, big, fm = pair_split(np.array([[5.0], [5.0]], dtype=np.float32))
    assert (small[0, 0], big[0, 0], fm[0, 0]) == (5.0, 5.0, False)


def test_pair_split_rejects_odd_rows():
    with pytest.raises(ValueError):
        pair_split(np.zeros((3, 2), np.float32))


def test_pair_merge_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        pair_merge(
            np.zeros((2, 2), np.float32),
            np.zeros((2, 3), np.float32),
            np.zeros((2, 2), np.bool_),
        )


def test_pair_round_trip_random(rng):
    for _ in range(50):
        rows = int(rng.integers(1, 33)) * 2
        cols = int(rng.integers(1, 17))
        m = rng.normal(size=(rows, cols)).astype(np.float32)
        small, big, fm = pair_split(m)
        assert np.all(small <= big)
        assert pair_merge(small, big, fm).tobytes() == m.tobytes()


def test_pack_bits_lsb_first_golden():
    # 4-bit values 1,2,3 -> nibbles packed low-first: 0x21, 0x03
    packed = pack_bits(np.array([1, 2, 3], dtype=np.uint64), 4)
    assert packed.tobytes() == bytes([0x21, 0x03])
    # cross-check against numpy's little bit order
    bits = np.unpackbits(packed, bitorder="little")[:12]
    assert list(bits) == [1, 0, 0, 0, 0, 1, 0, 0, 1, 1, 0, 0]


def test_pack_bits_width_edges():
    assert pack_bits(np.zeros(5, dtype=np.uint64), 0).size == 0
    assert unpack_bits(np.zeros(0, dtype=np.uint8), 0, 5).tolist() == [0] * 5
    with pytest.raises(ValueError):
        pack_bits(np.array([1], dtype=np.uint64), 0)
    with pytest.raises(ValueError):
        pack_bits(np.array([4], dtype=np.uint64), 2)
    with pytest.raises(ValueError):
        pack_bits(np.array([1], dtype=np.uint64), 33)
    with pytest.raises(ValueError):
        unpack_bits(np.zeros(1, dtype=np.uint8), 3, 10)


@settings(max_examples=60, deadline=None)
@given(
    width=st.integers(min_value=1, max_value=32),
    count=st.integers(min_value=0, max_value=200),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_pack_unpack_round_trip(width, count, seed):
    values = np.random.default_rng(seed).integers(
        0, 2**width, size=count, dtype=np.uint64
    )
    packed = pack_bits(values, width)
    assert packed.size == (count * width + 7) // 8
    assert np.array_equal(unpack_bits(packed, width, count), values)


@needs_numba
def test_backends_bit_identical(rng):
    nb = implementations("numba")
    npy = implementations("numpy")
    for _ in range(20):
        points = rng.normal(size=(40, 5)).astype(np.float32)
        centroids = rng.normal(size=(7, 5)).astype(np.float32)
        a1, d1 = nb["nearest_centroids"](points, centroids)
        a2, d2 = npy["nearest_centroids"](points, centroids)
        assert np.array_equal(a1, a2)
        assert d1.tobytes() == d2.tobytes()

        m = rng.normal(size=(16, 6)).astype(np.float32)
        s1, b1, f1 = nb["pair_split"](m)
        s2, b2, f2 = npy["pair_split"](m)
        assert s1.tobytes() == s2.tobytes()
        assert b1.tobytes() == b2.tobytes()
        assert np.array_equal(f1, f2)
        assert nb["pair_merge"](s1, b1, f1).tobytes() == npy["pair_merge"](
            s2, b2, f2
        ).tobytes()

        width = int(rng.integers(1, 17))
        values = rng.integers(0, 2**width, size=100, dtype=np.uint64)
        p1 = nb["pack_bits"](values, width)
        p2 = npy["pack_bits"](values, width)
        assert p1.tobytes() == p2.tobytes()
        assert np.array_equal(
            nb["unpack_bits"](p1, width, 100), npy["unpack_bits"](p2, width, 100)
        )


@needs_numba
def test_backends_agree_on_near_tie_distances():
    # centroids closer together than float32 resolution of the gap exercise
    # the tie path; float64 accumulation keeps both backends in lockstep
    points = np.array([[0.5, 0.5]], dtype=np.float32)
    eps = np.float32(2**-20)
    centroids = np.array(
        [[0.5 + eps, 0.5], [0.5, 0.5 + eps], [0.5 - eps, 0.5]], dtype=np.float32
    )
    nb = implementations("numba")
    npy = implementations("numpy")
    a1, d1 = nb["nearest_centroids"](points, centroids)
    a2, d2 = npy["nearest_centroids"](points, centroids)
    assert np.array_equal(a1, a2)
    assert d1.tobytes() == d2.tobytes()
