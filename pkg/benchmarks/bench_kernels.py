"""Time the jitted kernels against their pure-numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py

The numba path is compiled (and cached) on the first call; the warm-up run is
excluded from the timings.  When numba is unavailable only the numpy column
is reported.
"""

import time

import numpy as np

from eventclock import _kernels
from eventclock.arrival import (
    DEFAULT_N,
    DEFAULT_X_MIN,
    backflow_scan,
    default_backflow_candidates,
    default_backflow_times,
)
from eventclock.detector import build_correlation_projector
from eventclock.hilbert import propagator
from eventclock.spin_example import SpinExampleConfig, build


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_collapse_recursion():
    model = build(SpinExampleConfig())
    k_max = 20_000
    delta = 1.0 / k_max
    us = np.stack(
        [
            propagator(model.hamiltonian, k * delta, (k + 1) * delta).entries
            for k in range(k_max)
        ]
    )
    m = build_correlation_projector(model.correlation).entries
    psi0 = model.psi0.amplitudes.copy()
    rows = []
    t_np = timeit(lambda: _kernels._collapse_recursion_numpy(us, m, psi0.copy(), 0.0))
    rows.append(("numpy", t_np))
    if _kernels.USING_NUMBA:
        _kernels._collapse_recursion_jit(us[:10], m, psi0.copy(), 0.0)  # warm-up
        t_nb = timeit(lambda: _kernels._collapse_recursion_jit(us, m, psi0.copy(), 0.0))
        rows.append(("numba", t_nb))
    return f"collapse recursion (dim 4, k = {k_max})", rows


def bench_origin_current_scan():
    n = DEFAULT_N
    dx = -2.0 * DEFAULT_X_MIN / n
    p = 2 * np.pi * np.fft.fftfreq(n, d=dx)
    rng = np.random.default_rng(0)
    cands = np.ascontiguousarray(
        rng.normal(size=(144, n)) + 1j * rng.normal(size=(144, n))
    )
    ts = np.linspace(-6.0, 6.0, 1201)
    rows = []
    t_np = timeit(lambda: _kernels._origin_current_scan_numpy(cands, p, ts), repeats=2)
    rows.append(("numpy", t_np))
    if _kernels.USING_NUMBA:
        _kernels._origin_current_scan_jit(cands[:2], p, ts[:8])  # warm-up
        t_nb = timeit(
            lambda: _kernels._origin_current_scan_jit(cands, p, ts), repeats=2
        )
        rows.append(("numba", t_nb))
    return f"origin-current scan (144 candidates, n = {n}, 1201 times)", rows


def bench_full_backflow_scan():
    # end-to-end: whichever backend is active
    cands = default_backflow_candidates()
    ts = default_backflow_times()
    backflow_scan(cands[:2], ts[:8])  # warm-up
    t = timeit(lambda: backflow_scan(cands, ts), repeats=2)
    return f"documented backflow scan via {_kernels.backend()} backend", [
        (_kernels.backend(), t)
    ]


def main():
    print(f"active backend: {_kernels.backend()}")
    for bench in (bench_collapse_recursion, bench_origin_current_scan, bench_full_backflow_scan):
        label, rows = bench()
        print(f"\n{label}")
        base = rows[0][1]
        for name, seconds in rows:
            speedup = base / seconds if seconds else float("inf")
            print(f"  {name:6s} {seconds * 1e3:9.1f} ms   (x{speedup:.2f} vs numpy)")


if __name__ == "__main__":
    main()
