"""Time the numba kernels against their numpy twins.

Run: python3 benchmarks/bench_kernels.py [--repeat N]

Shapes follow the AgeNet forward pass on a small batch (conv1 lowering,
the first pool) and the preprocessing path (resize to 256, augment warp).
The first numba call compiles (or loads the cache) and is excluded.
"""
import argparse
import math
import time

import numpy as np

from agenet import kernels
from agenet._jit import HAS_NUMBA


def best_of(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    x = rng.random((4, 3, 257, 257))  # padded conv1 input
    cols = kernels._np_im2col(x, 3, 3, 2, 128, 128)
    act = rng.random((4, 64, 128, 128))
    x2 = rng.random((4, 64, 66, 66))  # padded conv2 input
    cols2 = kernels._np_im2col(x2, 3, 3, 1, 64, 64)
    _, idx = kernels._np_maxpool_forward(act, 2, 2)
    g = rng.random((4, 64, 64, 64))
    img = rng.uniform(0, 255, size=(3, 300, 400))
    face = rng.uniform(0, 255, size=(3, 256, 256))
    c, s = math.cos(math.radians(12)) / 1.1, math.sin(math.radians(12)) / 1.1
    return {
        "im2col 4x3x256 k3 s2": lambda k: k["im2col"](x, 3, 3, 2, 128, 128),
        "im2col 4x64x64 k3 s1": lambda k: k["im2col"](x2, 3, 3, 1, 64, 64),
        "col2im 4x3x256 k3 s2": lambda k: k["col2im"](cols, 4, 3, 257, 257, 3, 3, 2, 128, 128),
        "col2im 4x64x64 k3 s1": lambda k: k["col2im"](cols2, 4, 64, 66, 66, 3, 3, 1, 64, 64),
        "maxpool fwd 4x64x128": lambda k: k["maxpool_forward"](act, 2, 2),
        "maxpool bwd 4x64x128": lambda k: k["maxpool_backward"](g, idx, 128, 128, 2, 2),
        "resize 300x400->256": lambda k: k["resize_bilinear"](img, 256, 256),
        "affine warp 256": lambda k: k["affine_warp"](face, c, s, -s, c, 0.0),
    }


def impl(prefix):
    names = ("im2col", "col2im", "maxpool_forward", "maxpool_backward", "resize_bilinear", "affine_warp")
    return {n: getattr(kernels, prefix + n) for n in names}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAS_NUMBA:
        print("numba is not installed; the _nb_ kernels run as plain python and timings are meaningless")
    nb, npy = impl("_nb_"), impl("_np_")
    print(f"{'kernel':<24}{'numba ms':>10}{'numpy ms':>10}{'speedup':>9}")
    for name, run in cases(np.random.default_rng(0)).items():
        t_nb = best_of(lambda: run(nb), args.repeat)
        t_np = best_of(lambda: run(npy), args.repeat)
        print(f"{name:<24}{t_nb * 1e3:>10.2f}{t_np * 1e3:>10.2f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
