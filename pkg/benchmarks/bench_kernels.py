"""Time each hot kernel under both backends.

    python benchmarks/bench_kernels.py [--repeat 5]

The numba column excludes compilation (one warm-up call per kernel).
"""

import argparse
import time

import numpy as np

from kinosyn import _kernels
from kinosyn.nmf import initial_factors


def cases(rng):
    out = {}
    for d, k in [(16, 200), (16, 939), (64, 5000)]:
        M = rng.random((d, k))
        W0, C0 = initial_factors(M, 3, np.random.default_rng(0))
        out[f"mu_fit {d}x{k} n=3, 300 it"] = (
            "mu_fit",
            lambda fn, M=M, W0=W0, C0=C0: fn(M, W0.copy(), C0.copy(), 300, 1e-300, 1e-12),
        )
    emg = rng.random((16, 20000))
    z = np.cumsum(rng.normal(size=20000))
    k = 20000
    f = rng.random(k)
    p = np.cumsum(rng.normal(0, 0.003, (2, k)), axis=1)
    noise = np.zeros(k)
    out.update({
        "moving_average 16x20000 w=10": ("moving_average", lambda fn: fn(emg, 10)),
        "kalman_cv 20000": ("kalman_cv", lambda fn: fn(z, 1e-3, 1e-2)),
        "actuator 20000": ("actuator", lambda fn: fn(f, p, 0.0, p[:, 0].copy(), 0.2, 1.0, 0.01, noise)),
    })
    return out


def best_of(call, fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        call(fn)
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(42)
    print(f"{'kernel':32s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speed-up':>9s}")
    for label, (name, call) in cases(rng).items():
        np_fn = _kernels.IMPLEMENTATIONS["numpy"][name]
        nb_fn = _kernels.IMPLEMENTATIONS["numba"][name]
        call(nb_fn)  # compile
        t_np = best_of(call, np_fn, args.repeat)
        t_nb = best_of(call, nb_fn, args.repeat)
        print(f"{label:32s} {1e3 * t_np:12.2f} {1e3 * t_nb:12.2f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
