"""Compare the compiled skyline kernels against the pure-Python fallback.

Both backends must agree on survivors and dominance-check counts; the
script asserts that and prints wall time per algorithm.

    python benchmarks/bench_kernels.py [--n 20000] [--dims 3] [--repeats 3]
"""

import argparse
import statistics
import time

import numpy as np

from css_skyline.skyline import _backend
from css_skyline.skyline.algorithms import CORES, run_core


def workload(n, d, corr, seed):
    rng = np.random.default_rng(seed)
    cov = np.full((d, d), corr) + np.eye(d) * (1 - corr)
    return rng.multivariate_normal(np.zeros(d), cov, size=n)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--dims", type=int, default=3)
    ap.add_argument("--corr", type=float, default=-0.3)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _backend.compiled_kernels is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    pts = workload(args.n, args.dims, args.corr, args.seed)
    print(f"n={args.n} d={args.dims} corr={args.corr}")
    print(f"{'algorithm':<11}{'checks':>12}{'python s':>11}{'cython s':>11}{'speedup':>9}")
    for name in CORES:
        if name == "bruteforce" and args.n > 5000:
            continue
        times = {}
        outs = {}
        for label, kern in (("python", _backend.python_kernels), ("cython", _backend.compiled_kernels)):
            ts = []
            for _ in range(args.repeats):
                t0 = time.perf_counter()
                outs[label] = run_core(name, pts, kern)
                ts.append(time.perf_counter() - t0)
            times[label] = statistics.median(ts)
        (kp, cp, _), (kc, cc, _) = outs["python"], outs["cython"]
        assert np.array_equal(kp, kc) and cp == cc, f"{name}: backends disagree"
        print(f"{name:<11}{cp:>12}{times['python']:>11.4f}{times['cython']:>11.4f}{times['python'] / times['cython']:>8.1f}x")


if __name__ == "__main__":
    main()
