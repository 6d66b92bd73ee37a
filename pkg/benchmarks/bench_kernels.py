"""Compare the compiled mixture-posterior kernel against the numpy twin.

Usage: python benchmarks/bench_kernels.py [--repeats 50]

Times `posterior_mean` on a grid of (corpus size, entries per clip) and
checks that both backends agree to near machine precision. Pure-numpy
runs (no compiled extension available) print the numpy column only.
"""

from __future__ import annotations

import argparse
import importlib
import time

import numpy as np

from noisebeam import _kernels_py


def _load_compiled():
    try:
        return importlib.import_module("noisebeam._kernels")
    except ImportError:
        return None


def _time(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    compiled = _load_compiled()
    rng = np.random.default_rng(0)
    sizes = [(16, 1024), (16, 4096), (64, 4096), (64, 16384), (256, 16384)]

    header = f"{'corpus x entries':>18} {'numpy (ms)':>12}"
    if compiled is not None:
        header += f" {'cython (ms)':>12} {'speedup':>8} {'max |diff|':>12}"
    print(header)
    for n, e in sizes:
        corpus = np.ascontiguousarray(rng.standard_normal((n, e)))
        v = np.ascontiguousarray(rng.standard_normal(e))
        inv = np.ascontiguousarray(np.full(e, 0.7))
        alpha = np.ascontiguousarray(np.full(e, 0.3))
        call = (v, corpus, alpha, inv)
        t_py = _time(_kernels_py.posterior_mean, call, args.repeats)
        line = f"{f'{n} x {e}':>18} {t_py * 1e3:>12.3f}"
        if compiled is not None:
            t_cy = _time(compiled.posterior_mean, call, args.repeats)
            m_py, w_py = _kernels_py.posterior_mean(*call)
            m_cy, w_cy = compiled.posterior_mean(*call)
            diff = max(
                float(np.max(np.abs(m_py - np.asarray(m_cy)))),
                float(np.max(np.abs(w_py - np.asarray(w_cy)))),
            )
            line += f" {t_cy * 1e3:>12.3f} {t_py / t_cy:>8.2f} {diff:>12.3e}"
        print(line)
    if compiled is None:
        print("compiled kernel unavailable; showing numpy backend only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
