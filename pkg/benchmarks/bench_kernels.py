"""Compare the numba and pure-numpy backends of the hot kernels.

    python benchmarks/bench_kernels.py [--samples 500000] [--repeat 3]

Both backends must produce identical results; the script checks that before
printing timings.
"""
import argparse
import time

import numpy as np

from horosol._accel import HAVE_NUMBA
from horosol._kernels import one_cusp_search, reduce_batch
from horosol.covering import build_class2
from horosol.hyperbolic import closed_horocycle_matrices, flow_context


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--samples", type=int, default=500_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba unavailable or disabled; only the numpy backend can run")
    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]

    ctx = flow_context(build_class2(2), 2)
    M = closed_horocycle_matrices(np.exp(-10.0), args.samples, ctx.top.closed_width(0), 0.37)
    addr = np.zeros(args.samples, dtype=np.int64)
    cases = {
        "reduce_batch": lambda b: reduce_batch(M, addr, ctx.top.tables, backend=b),
        "one_cusp_search(g=1,k=4)": lambda b: one_cusp_search(1, 4, backend=b),
        "one_cusp_search(g=2,k=4)": lambda b: one_cusp_search(2, 4, backend=b),
    }
    for b in backends:  # compile outside the timed region
        reduce_batch(M[:10], addr[:10], ctx.top.tables, backend=b)
        one_cusp_search(1, 2, backend=b)

    print(f"{'kernel':28s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup")
    for name, fn in cases.items():
        results, times = [], []
        for b in backends:
            dt, out = best_of(lambda: fn(b), args.repeat)
            times.append(dt)
            results.append(out)
        if len(results) == 2:
            a, c = results
            same = all(np.array_equal(x, y) for x, y in zip(a, c)) if isinstance(a, tuple) else a == c
            if not same:
                raise SystemExit(f"{name}: backends disagree")
        speed = f"{times[1] / times[0]:8.1f}x" if len(times) == 2 else ""
        print(f"{name:28s} " + " ".join(f"{t:9.3f}s" for t in times) + f"  {speed}")


if __name__ == "__main__":
    main()
