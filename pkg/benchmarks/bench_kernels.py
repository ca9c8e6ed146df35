"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on the workload the package actually gives it: the 1e-3
reduced grid, the 0.02 four-parameter scan, and moments of 10^6 shots.
Results are checked for agreement before timings are printed.
"""

import argparse
import timeit

import numpy as np

from qwitness import kernels, optimizer


def workloads():
    a1 = optimizer._a1_grid(1e-3)
    grid = optimizer.full_grid(0.02)
    shots = np.random.default_rng(0).choice([0.0, 0.809], size=10**6)
    return {
        "scan_reduced(step=1e-3)": lambda k: k.scan_reduced(a1, 1e-3, 1.0),
        "scan_full(step=0.02)": lambda k: k.scan_full(grid, grid, optimizer.FEAS_TOL),
        "batch_moments(n=1e6)": lambda k: k.batch_moments(shots),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="best-of-N timing")
    args = parser.parse_args(argv)

    found = kernels.backends()
    names = sorted(found)
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(names)}")
    header = f"{'kernel':<26}" + "".join(f"{n + ' [ms]':>16}" for n in names)
    if "cython" in found:
        header += f"{'speedup':>10}"
    print(header)
    for label, fn in workloads().items():
        results = {n: fn(found[n]) for n in names}
        if "cython" in found:
            c, p = results["cython"], results["python"]
            if label.startswith("scan"):
                assert c == p, f"{label}: backends disagree"
            else:
                assert np.allclose(c, p, rtol=1e-12), f"{label}: backends disagree"
        best = {n: min(timeit.repeat(lambda: fn(found[n]), number=1, repeat=args.repeat)) for n in names}
        row = f"{label:<26}" + "".join(f"{best[n] * 1e3:>16.2f}" for n in names)
        if "cython" in found:
            row += f"{best['python'] / best['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
