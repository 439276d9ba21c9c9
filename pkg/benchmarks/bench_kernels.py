"""Wall-time comparison of the numba kernels with their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3]

Each kernel is run once to trigger compilation, then timed ``--repeat``
times; the best time is reported together with the speed-up and the
largest relative difference between the two backends.
"""
import argparse
import time

import numpy as np

from zloop._accel import HAVE_NUMBA
from zloop.kernels import enumerate_words, geodesic_walk, heat_kernel_batch
from zloop.surfaces import funnel3


def best_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    model = funnel3(5.0)
    gens, inv = model.letter_matrices, model.inverse_letters
    d = np.linspace(0.0, 20.0, 20_000)
    normals = np.random.default_rng(0).standard_normal((4096, 500, 2))
    return {
        "enumerate_words(funnel3, n=10)": lambda nb: enumerate_words(gens, inv, 10, 1e12, use_numba=nb)[1],
        "heat_kernel_batch(t=1, 2e4 distances)": lambda nb: heat_kernel_batch(1.0, d, use_numba=nb),
        "geodesic_walk(4096 paths x 500 steps)": lambda nb: geodesic_walk(0.0, 1.0, normals, 0.03, use_numba=nb),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba unavailable (or ZLOOP_DISABLE_NUMBA set); only the numpy path is timed")
    print(f"{'kernel':42s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speed-up':>9s} {'max rel diff':>13s}")
    for name, fn in cases().items():
        t_np = best_time(lambda: fn(False), args.repeat)
        if HAVE_NUMBA:
            t_nb = best_time(lambda: fn(True), args.repeat)
            a, b = fn(True), fn(False)
            diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
            print(f"{name:42s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:9.1f} {diff:13.1e}")
        else:
            print(f"{name:42s} {t_np:10.4f} {'-':>10s} {'-':>9s} {'-':>13s}")


if __name__ == "__main__":
    main()
