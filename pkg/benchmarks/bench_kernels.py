#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy reference backend.

Times each kernel at a realistic size (one trial's worth of work) and at a
larger stress size, then prints per-call latency for both backends and the
speedup. Arrays are pre-coerced so the timing covers the kernel itself, not
input conversion.

Usage: python3 benchmarks/bench_kernels.py [--samples N]
"""
import argparse
import time

import numpy as np

from graspdec._kernels import backend_module

try:
    native = backend_module("native")
except ImportError as exc:
    raise SystemExit(f"error: {exc}; build with `python3 setup.py "
                     "build_ext --inplace` first") from exc
reference = backend_module("reference")


def _time_per_call(fn, args, samples: int) -> float:
    # quick calibration so each sample runs >= ~5 ms
    loops = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(loops):
            fn(*args)
        dt = time.perf_counter() - t0
        if dt >= 0.005 or loops >= 1 << 20:
            break
        loops *= 4
    best = dt / loops
    for _ in range(samples - 1):
        t0 = time.perf_counter()
        for _ in range(loops):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / loops)
    return best


def _cases():
    rng = np.random.default_rng(42)

    def rms_args(n_samples, n_windows, win_n):
        x = rng.standard_normal(n_samples)
        step = max(1, (n_samples - win_n) // max(1, n_windows - 1))
        starts = np.arange(n_windows, dtype=np.intp) * step
        return x, starts, win_n

    def mse_args(n_stack):
        pattern = rng.integers(0, 2, (6, 30)).astype(np.float64)
        stack = rng.integers(0, 2, (n_stack, 6, 30)).astype(np.float64)
        return pattern, stack

    def power_args(n_filters, n_channels, n_segments):
        projection = rng.standard_normal((n_filters, n_channels))
        base = rng.standard_normal((n_segments, n_channels, 2 * n_channels))
        covs = np.einsum("sij,skj->sik", base, base) / (2 * n_channels)
        return projection, np.ascontiguousarray(covs)

    yield ("sliding_rms",
           "1 channel, 30 windows of 275", rms_args(1000, 30, 275))
    yield ("sliding_rms",
           "100k samples, 1000 windows of 2750", rms_args(100_000, 1000, 2750))
    yield ("mse_to_stack", "6x30 vs 50 patterns", mse_args(50))
    yield ("mse_to_stack", "6x30 vs 5000 patterns", mse_args(5000))
    yield ("projected_power",
           "4x20 over 30 segments", power_args(4, 20, 30))
    yield ("projected_power",
           "4x64 over 510 segments", power_args(4, 64, 510))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=5,
                        help="timing samples per case (best is reported)")
    opts = parser.parse_args()

    header = (f"{'kernel':<16} {'case':<36} {'reference':>12} "
              f"{'native':>12} {'speedup':>8}")
    print(header)
    print("-" * len(header))
    for name, label, args in _cases():
        ref_fn = getattr(reference, name)
        nat_fn = getattr(native, name)
        if not np.allclose(ref_fn(*args), nat_fn(*args), rtol=1e-10):
            raise SystemExit(f"error: backends disagree on {name} ({label})")
        t_ref = _time_per_call(ref_fn, args, opts.samples)
        t_nat = _time_per_call(nat_fn, args, opts.samples)
        print(f"{name:<16} {label:<36} {t_ref * 1e6:>10.1f}us "
              f"{t_nat * 1e6:>10.1f}us {t_ref / t_nat:>7.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
