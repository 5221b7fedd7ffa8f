"""Compiled vs pure-Python kernels on the sin(x+y+z) example.

    python3 benchmarks/bench_kernels.py [--repeats N]

Times the three hot paths (nested quadrature, a single Euler march and the
fused multi-level march used by Richardson) on both backends and checks that
they return identical numbers.
"""
import argparse
import sys
import time

import numpy as np

from tripleivp import example_problem, kernels
from tripleivp.ivp import r_table
from tripleivp.leibniz import LeibnizEvaluator
from tripleivp.quad import QuadConfig, integrate3d_oracle


def best_of(fn, repeats):
    best, value = float("inf"), None
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return best, value


def same(a, b):
    if isinstance(a, tuple):
        return all(same(u, v) for u, v in zip(a, b))
    if isinstance(a, np.ndarray):
        return a.tobytes() == b.tobytes()
    return a == b


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)
    if "cython" not in kernels.available_backends():
        print("compiled kernels not built; run `python3 setup.py build_ext --inplace`", file=sys.stderr)
        return 1

    p = example_problem()
    ev = LeibnizEvaluator(p)
    ic = ev.initial_conditions()
    n = 400
    levels = 5
    fine = r_table(ev, p.x0, p.x_end, n * 2 ** (levels - 1))
    single = np.ascontiguousarray(fine.values[:: 2 ** (levels - 1)])

    cases = [
        ("oracle, tol 1e-5", lambda b: integrate3d_oracle(p, QuadConfig(tol=1e-5), backend=b)),
        ("leibniz R at x=3", lambda b: LeibnizEvaluator(p, backend=b).leibniz_R(3.0)),
        (f"euler march, {n} steps",
         lambda b: kernels.euler_march(single, fine.h * 2 ** (levels - 1), ic.w0, ic.p0, ic.q0, n, backend=b)[:3]),
        (f"fused levels, {levels} x from {n}",
         lambda b: kernels.euler_levels(fine.values, fine.h, ic.w0, ic.p0, ic.q0, n, levels, backend=b)[0]),
    ]
    print(f"{'kernel':34s} {'cython [s]':>12s} {'python [s]':>12s} {'speedup':>9s}  equal")
    for name, fn in cases:
        tc, vc = best_of(lambda: fn("cython"), args.repeats)
        tp, vp = best_of(lambda: fn("python"), args.repeats)
        print(f"{name:34s} {tc:12.5f} {tp:12.5f} {tp / tc:9.1f}  {same(vc, vp)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
