"""Timing comparison of the jitted kernels against the pure-Python
fallback (WML_DISABLE_NUMBA=1).

Run twice, once per mode, and compare:

    python3 benchmarks/bench_kernels.py
    WML_DISABLE_NUMBA=1 python3 benchmarks/bench_kernels.py --paths 200

The kernels are byte-deterministic, so both modes must also agree
exactly on the outputs; the script checks that via digests.
"""

import argparse
import hashlib
import os
import time

import numpy as np


def bench_pruefer(reps):
    from wml._kernels import pruefer_theta_end
    x = np.linspace(1e-8, 1.0, 200_000)
    b = 2.0 / np.maximum(x, 1e-8)
    bm = 2.0 / np.maximum(0.5 * (x[:-1] + x[1:]), 1e-8)
    pruefer_theta_end(1.0, x[:10], b[:10], bm[:9], 0.0)  # compile
    t0 = time.perf_counter()
    for _ in range(reps):
        theta = pruefer_theta_end(np.pi, x, b, bm, np.pi / 2)
    dt = (time.perf_counter() - t0) / reps
    return dt, hashlib.sha256(np.float64(theta).tobytes()).hexdigest()[:16]


def bench_explosion(n_paths):
    from wml._kernels import explosion_paths
    fine = np.full(4096, 0.5)
    coarse = np.full(8192, -1.0)
    status = np.zeros(n_paths, dtype=np.uint8)
    times = np.zeros(n_paths)
    half = np.full(n_paths, 255, dtype=np.uint8)
    args = (12345, n_paths, 2.0, 1.0, 50.0, 1e-3,
            1e-4, 1.0, fine, 50.0 * 1.05, coarse, 10, status, times, half)
    explosion_paths(*args)  # compile + warm
    status[:] = 0
    times[:] = 0
    half[:] = 255
    t0 = time.perf_counter()
    explosion_paths(*args)
    dt = time.perf_counter() - t0
    digest = hashlib.sha256(
        status.tobytes() + times.tobytes() + half.tobytes()).hexdigest()[:16]
    return dt, digest


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--paths", type=int, default=10_000)
    args = ap.parse_args()
    mode = ("fallback" if os.environ.get("WML_DISABLE_NUMBA")
            else "numba")
    t, d = bench_pruefer(args.reps)
    print(f"[{mode}] pruefer_theta_end 200k nodes: {t * 1e3:9.2f} ms  "
          f"digest {d}")
    t, d = bench_explosion(args.paths)
    print(f"[{mode}] explosion_paths {args.paths} paths: {t * 1e3:9.2f} ms  "
          f"digest {d}")


if __name__ == "__main__":
    main()
