"""Compare the compiled and pure-Python kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--n 20000] [--repeat 3]

Prints one line per (kernel, backend) with the best wall time over the
repeats and the speed-up of the compiled backend. Results of the two
backends are cross-checked before timing.
"""
from __future__ import annotations

import argparse
import importlib
import time

import numpy as np


def load_backends() -> dict:
    backends = {"python": importlib.import_module("nspec._kernels_py")}
    try:
        backends["cython"] = importlib.import_module("nspec._kernels")
    except ImportError:
        pass
    return backends


def workload(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    o1, o2 = rng.uniform(0, 100, (2, n))
    d1, d2 = rng.uniform(-100, 100, (2, n))
    h = np.zeros((n, 3, 3))
    h[:, 0, 0] = d1
    h[:, 1, 1] = d1 - d2
    h[:, 0, 1] = h[:, 1, 0] = o2 / 2
    h[:, 0, 2] = h[:, 2, 0] = o1 / 2
    return (o1, o2, d1, d2), h


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(n: int = 20000, repeat: int = 3) -> list[tuple[str, str, float]]:
    backends = load_backends()
    params, h = workload(n)
    kernels = {
        "trig_energies_batch": lambda mod: mod.trig_energies_batch(*params),
        "jacobi_eigh3_batch": lambda mod: mod.jacobi_eigh3_batch(h),
    }
    if "cython" in backends:
        e_py, _ = backends["python"].trig_energies_batch(*params)
        e_cy, _ = backends["cython"].trig_energies_batch(*params)
        scale = np.abs(h).max()
        if np.abs(e_py - e_cy).max() > 1e-12 * scale:
            raise AssertionError("backends disagree on trig energies")
    results = []
    for kname, call in kernels.items():
        for bname, mod in backends.items():
            results.append((kname, bname, best_time(lambda: call(mod), repeat)))
    return results


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=20000, help="configurations per call")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    results = run(args.n, args.repeat)
    times = {(k, b): t for k, b, t in results}
    print(f"{'kernel':<22}{'backend':<9}{'seconds':>10}{'per call (us)':>15}{'speed-up':>10}")
    for k, b, t in results:
        ref = times.get((k, "python"))
        speed = f"{ref / t:9.1f}x" if b == "cython" and ref else ""
        print(f"{k:<22}{b:<9}{t:>10.4f}{1e6 * t / args.n:>15.3f}{speed:>10}")


if __name__ == "__main__":
    main()
