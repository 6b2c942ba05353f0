"""Benchmark the compiled kernel backend against the pure-numpy fallback.

Run as a script:

    python benchmarks/bench_kernels.py [--sizes 2500,10000,40000] [--repeats 50]

For each kernel and problem size the best-of-``repeats`` wall time of both
backends is reported together with the speedup and a cross-check of the
results (max absolute deviation).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fracmfg.kernels import _reference

try:
    from fracmfg.kernels import _core
except ImportError:
    _core = None


def _best_time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def bench_case(name, args_out, repeats):
    """Time one kernel on both backends; returns (ref_s, core_s, max_dev)."""
    args, out_ref = args_out
    out_core = np.empty_like(out_ref)
    ref_fn = getattr(_reference, name)
    t_ref = _best_time(lambda: ref_fn(*args, out_ref), repeats)
    if _core is None:
        return t_ref, None, None
    core_fn = getattr(_core, name)
    t_core = _best_time(lambda: core_fn(*args, out_core), repeats)
    ref_fn(*args, out_ref)
    core_fn(*args, out_core)
    return t_ref, t_core, float(np.max(np.abs(out_ref - out_core)))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="50,2500,10000,40000", help="comma-separated point counts")
    parser.add_argument("--repeats", type=int, default=50, help="timing repetitions (best-of)")
    args = parser.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)

    if _core is None:
        print("compiled backend unavailable; timing the fallback only")
    header = f"{'kernel':24s} {'npts':>8s} {'python':>10s} {'compiled':>10s} {'speedup':>8s} {'max dev':>10s}"
    print(header)
    print("-" * len(header))
    for npts in sizes:
        q = np.ascontiguousarray(rng.normal(size=(4, npts)))
        hist_len = 200
        w = rng.normal(size=hist_len)
        hist = np.ascontiguousarray(rng.normal(size=(hist_len, npts)))
        cases = {
            "godunov_value": ((q, 2.0, 0.5), np.empty(npts)),
            "godunov_grad": ((q, 3.0, 0.5), np.empty_like(q)),
            "weighted_history_sum": ((w, hist), np.empty(npts)),
        }
        for name, args_out in cases.items():
            t_ref, t_core, dev = bench_case(name, args_out, args.repeats)
            if t_core is None:
                print(f"{name:24s} {npts:8d} {t_ref * 1e3:9.3f}ms {'-':>10s} {'-':>8s} {'-':>10s}")
            else:
                print(
                    f"{name:24s} {npts:8d} {t_ref * 1e3:9.3f}ms {t_core * 1e3:9.3f}ms "
                    f"{t_ref / t_core:7.1f}x {dev:10.2e}"
                )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
