"""Compiled vs pure-Python truncated-exponential kernel.

Times the kernel alone on the exponent produced by a real catalysis run, and
the full moment extraction with each backend swapped in.

    python benchmarks/bench_series.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from catqkd import _series_py, catalysis
from catqkd.catalysis import CatalysisParams, generating_exponent

try:
    from catqkd import _series_core
except ImportError:
    _series_core = None


def _best(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def _moments_with(kernel, p):
    saved = catalysis.exp_quadratic
    catalysis.exp_quadratic = kernel
    try:
        return catalysis._moments_cached.__wrapped__(p.lam, p.d, p.T_C, p.m)
    finally:
        catalysis.exp_quadratic = saved


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _series_core is None:
        print("compiled kernel not built; only the Python timings are meaningful")

    header = f"{'m':>2} {'what':<8} {'python ms':>10} {'compiled ms':>12} {'speed-up':>9}  max |diff|"
    print(header)
    print("-" * len(header))
    for m in range(4):
        p = CatalysisParams(0.6, 1.0, 0.8, m)
        lin, quad = generating_exponent(p).series_terms()
        caps = [m] * 4 + [2] * 4
        deg = 4 * m + 4

        t_py = _best(lambda: _series_py.exp_quadratic(lin, quad, caps, deg), args.repeat)
        ref = _series_py.exp_quadratic(lin, quad, caps, deg)
        if _series_core is not None:
            t_c = _best(lambda: _series_core.exp_quadratic(lin, quad, caps, deg), args.repeat)
            diff = np.max(np.abs(_series_core.exp_quadratic(lin, quad, caps, deg) - ref))
            print(f"{m:>2} {'kernel':<8} {1e3 * t_py:>10.3f} {1e3 * t_c:>12.3f} {t_py / t_c:>8.1f}x  {diff:.1e}")
        else:
            print(f"{m:>2} {'kernel':<8} {1e3 * t_py:>10.3f} {'-':>12} {'-':>9}")

        t_py = _best(lambda: _moments_with(_series_py.exp_quadratic, p), args.repeat)
        if _series_core is not None:
            t_c = _best(lambda: _moments_with(_series_core.exp_quadratic, p), args.repeat)
            a = _moments_with(_series_py.exp_quadratic, p).cov
            b = _moments_with(_series_core.exp_quadratic, p).cov
            print(f"{m:>2} {'moments':<8} {1e3 * t_py:>10.3f} {1e3 * t_c:>12.3f} {t_py / t_c:>8.1f}x  "
                  f"{np.max(np.abs(a - b)):.1e}")


if __name__ == "__main__":
    main()
