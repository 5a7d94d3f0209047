"""Time the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``. Each kernel is checked for
agreement before it is timed.
"""
import argparse
import timeit

import numpy as np

from fracwave import _kernels_py
from fracwave.core import make_params, transition_profile
from fracwave.decimation import branch_interval, build_tree

try:
    from fracwave import _kernels
except ImportError:
    _kernels = None


def cases(p: float, level: int):
    params = make_params(p)
    tree = build_tree(params, level)
    lam = tree.levels[level]
    lam = lam[(lam > 0.0) & (lam < 2.0)]
    lo, hi = branch_interval(params, "lowest")
    rows = np.random.default_rng(0).standard_normal((82, 3**(level - 2) + 1))
    z = np.linspace(0.0, 0.9 * min(params.p, params.q), rows.shape[0])
    prof = transition_profile(params, level)
    grid_rows = np.random.default_rng(1).standard_normal((82, 3**level + 1))
    return {
        "invert_cubic": ((lam, lo, hi, params.pq), {}),
        "extend": ((rows, z, params.p), {}),
        "laplacian": ((grid_rows, prof.a, prof.b), {}),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=0.2)
    ap.add_argument("--level", type=int, default=9)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':<14}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, (call_args, kw) in cases(args.p, args.level).items():
        py_fn = getattr(_kernels_py, name)
        t_py = min(timeit.repeat(lambda: py_fn(*call_args, **kw), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:<14}{1e3 * t_py:>14.3f}{'-':>14}{'-':>10}")
            continue
        cy_fn = getattr(_kernels, name)
        gap = np.max(np.abs(np.asarray(py_fn(*call_args)) - np.asarray(cy_fn(*call_args))))
        assert gap < 1e-12, f"{name}: backends differ by {gap}"
        t_cy = min(timeit.repeat(lambda: cy_fn(*call_args, **kw), number=1, repeat=args.repeat))
        print(f"{name:<14}{1e3 * t_py:>14.3f}{1e3 * t_cy:>14.3f}{t_py / t_cy:>10.1f}")


if __name__ == "__main__":
    main()
