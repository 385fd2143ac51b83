"""Time each hot kernel on both backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Compilation is excluded: every kernel is called once before timing.
"""

import argparse
import time

import numpy as np

from carapace_id._kernels import _numpy
from carapace_id.imgproc import gaussian_kernel
from carapace_id.keypoints import rotated_tables


def cases(rng):
    roi = rng.uniform(0, 255, (128, 96))
    big = rng.uniform(0, 255, (480, 640))
    k = gaussian_kernel()
    rot = np.array([[0.866, -0.5, 120.0], [0.5, 0.866, -40.0]])
    coarse = rng.uniform(0, 200, (22, 17))
    blocky = np.kron(coarse, np.ones((6, 6)))[:128, :96] + 20.0
    xs = rng.integers(16, 80, 500)
    ys = rng.integers(16, 112, 500)
    idx = rng.integers(0, 30, 500)
    tables = rotated_tables()
    a = rng.integers(0, 256, (500, 32), dtype=np.uint8)
    b = rng.integers(0, 256, (500, 32), dtype=np.uint8)
    return {
        "correlate_replicate 480x640": ("correlate_replicate", (big, k.weights, *k.anchor)),
        "warp_affine 480x640": ("warp_affine", (big, rot, 480, 640, 0.0, False)),
        "cell_histograms 128x96": ("cell_histograms", (roi, rng.uniform(0, 180, roi.shape), 8, 9)),
        "fast_scores 128x96": ("fast_scores", (blocky, 20.0, 9)),
        "brief_bits 500 kp": ("brief_bits", (blocky, xs, ys, idx, tables)),
        "hamming_matrix 500x500": ("hamming_matrix", (a, b)),
    }


def bench(fn, args, repeat):
    fn(*args)
    start = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - start) / repeat * 1e3


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    try:
        from carapace_id._kernels import _numba
    except ImportError:
        _numba = None
        print("numba not installed; timing the numpy backend only")

    print(f"{'kernel':<28}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, (attr, fargs) in cases(np.random.default_rng(0)).items():
        t_np = bench(getattr(_numpy, attr), fargs, args.repeat)
        if _numba is None:
            print(f"{name:<28}{t_np:>12.3f}")
            continue
        t_nb = bench(getattr(_numba, attr), fargs, args.repeat)
        print(f"{name:<28}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
