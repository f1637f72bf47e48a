"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]
"""
import argparse
import math
import timeit

import numpy as np

from gammalab import kernels


def _cases(quick):
    rng = np.random.default_rng(0)
    rows = 2_000 if quick else 20_000
    for r in (2.0, 4.0, math.inf):
        Z = rng.standard_normal((rows, 64)) + 1j * rng.standard_normal((rows, 64))
        yield f"row_norms r={r:g} {rows}x64", "row_norms", (Z, np.ones(64), r)
    for N in ((10, 14) if quick else (12, 16, 18)):
        X = rng.standard_normal((N, 16))
        yield f"rademacher_exhaustive N={N} dim=16", "rademacher_exhaustive", (X, np.ones(16), 4.0, 4.0)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args(argv)

    names = ["python"] + (["cython"] if kernels._c is not None else [])
    print(f"{'case':40s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, fn, inputs in _cases(args.quick):
        best = {}
        results = {}
        for name in names:
            f = getattr(kernels.get_backend(name), fn)
            results[name] = f(*inputs)
            best[name] = min(timeit.repeat(lambda: f(*inputs), number=1, repeat=args.repeat))
        line = f"{label:40s}" + "".join(f"{best[n] * 1e3:10.2f}ms" for n in names)
        if len(names) == 2:
            assert np.allclose(results["python"], results["cython"], rtol=1e-10)
            line += f"{best['python'] / best['cython']:11.1f}x"
        print(line)
    if len(names) == 1:
        print("compiled kernels unavailable; only the fallback was timed")


if __name__ == "__main__":
    main()
