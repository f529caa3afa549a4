"""Time the hot kernels on the numba and numpy backends.

Run from the repository root:

    python3 benchmarks/backend_speed.py
    python3 benchmarks/backend_speed.py --points 8192 --dims 32 --repeats 7

Reports the best wall time over the repeats; the first numba call is a warm-up
so JIT compilation never lands in a measurement.  Both backends produce
bit-identical outputs (the test suite enforces this), so the only question
benchmarked here is speed.
"""

import argparse
import time

import numpy as np

from heraq._kernels import NUMBA_AVAILABLE, implementations


def _best_time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def _workloads(rng, n, d, k):
    points = rng.normal(size=(n, d)).astype(np.float32)
    centroids = rng.normal(size=(k, d)).astype(np.float32)
    even = points if n % 2 == 0 else points[:-1]
    half = even[: even.shape[0] // 2]
    fm = rng.random(half.shape) < 0.5
    codes = rng.integers(0, 1 << 12, size=n * d, dtype=np.uint64)
    packed = np.zeros((codes.size * 12 + 7) // 8, dtype=np.uint8)
    return {
        "nearest_centroids": (points, centroids),
        "pair_split": (even,),
        "pair_merge": (half, half, fm),
        "pack_bits": (codes, 12),
        "unpack_bits": (packed, 12, codes.size),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=4096)
    parser.add_argument("--dims", type=int, default=16)
    parser.add_argument("--centroids", type=int, default=256)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])
    if len(backends) == 1:
        print("numba not importable; timing the numpy backend only")
    rng = np.random.default_rng(args.seed)
    work = _workloads(rng, args.points, args.dims, args.centroids)

    kernels = {b: implementations(b) for b in backends}
    for b in backends:
        for name, call_args in work.items():
            kernels[b][name](*call_args)  # warm-up; compiles numba kernels

    width = max(len(name) for name in work)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call_args in work.items():
        times = [_best_time(kernels[b][name], call_args, args.repeats) for b in backends]
        row = f"{name:<{width}}  " + "  ".join(f"{t * 1e3:>10.3f}ms" for t in times)
        if len(times) == 2:
            row += f"  {times[0] / times[1]:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
