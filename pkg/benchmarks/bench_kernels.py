"""Compare the compiled and pure-Python Dormand-Prince kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Each workload is run with both kernels; the table reports the best wall time
over the repeats, the speed-up and the largest difference between the two
final states.
"""

import argparse
import math
import sys
import time

import numpy as np

from flowshift import _kernel
from flowshift import fields as fl


def workloads():
    rot = fl.rigid_rotation()
    nl = fl.nonlinear_rotation()
    blocks = fl.rotation_blocks((1, 3), 1)
    vdp = fl.polynomial_field(2, [([1, 0], [0, 1]), ([0, -1], [1, 0]), ([0, 2], [0, 1]), ([0, -2], [2, 1])],
                              name="van_der_pol")
    return [
        ("rotation, t=2pi", rot.evaluate, np.array([1.0, 0.0]), 2 * math.pi),
        ("nonlinear rotation r=2, t=10", nl.evaluate, np.array([2.0, 0.0]), 10.0),
        ("rotation blocks R^5, t=20", blocks.evaluate, np.array([1.0, 0.0, 0.5, 0.5, 1.0]), 20.0),
        ("van der Pol mu=2, t=20", vdp.evaluate, np.array([2.0, 0.0]), 20.0),
    ]


def timed(solve, f, y0, t, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = solve(f, y0, t, 1e-9, 1e-12, math.inf, 1e-14, 10**6, 1e8, y0.size, False)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernel.compiled_solve is None:
        print("compiled kernel not available; build it with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'workload':<32}{'steps':>7}{'python ms':>12}{'cython ms':>12}{'speed-up':>10}{'max |dy|':>11}")
    for name, f, y0, t in workloads():
        tp, op = timed(_kernel.python_solve, f, y0, t, args.repeat)
        tc, oc = timed(_kernel.compiled_solve, f, y0, t, args.repeat)
        dy = float(np.max(np.abs(op[0] - oc[0])))
        print(f"{name:<32}{op[3]:>7d}{1e3 * tp:>12.2f}{1e3 * tc:>12.2f}{tp / tc:>9.1f}x{dy:>11.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
