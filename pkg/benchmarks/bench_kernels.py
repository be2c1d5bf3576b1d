"""Compiled versus pure-Python polynomial jet kernel.

    python benchmarks/bench_kernels.py [--points 2000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from nullity_lab import kernels
from nullity_lab.gallery import random_immersion
from nullity_lab.immersion import HOLOMORPHIC

CASES = [(1, 3, 3), (2, 4, 4), (3, 4, 5)]  # (m, degree, N)


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = ["python"] + (["cython"] if kernels._compiled is not None else [])
    if len(backends) == 1:
        print("compiled kernel not built; timing the fallback only")
    print(f"{'m':>2} {'deg':>3} {'N':>2} {'terms':>5} " + " ".join(f"{b:>10}" for b in backends) + "  speedup")
    for m, deg, N in CASES:
        imm = random_immersion(0, degree=deg, m=m, N=N, cls=HOLOMORPHIC)
        pts = np.array(imm.chart.random(args.points, seed=1))
        ref = imm.core_jets(pts, backend="python")
        row = []
        for b in backends:
            out = imm.core_jets(pts, backend=b)
            err = max(float(np.abs(x - y).max()) for x, y in zip(out, ref))
            assert err < 1e-12, f"{b} disagrees with the fallback by {err:.2e}"
            row.append(best_time(lambda: imm.core_jets(pts, backend=b), args.repeat))
        speed = f"{row[0] / row[-1]:7.1f}x" if len(row) > 1 else ""
        print(f"{m:>2} {deg:>3} {N:>2} {len(imm._packed[0]):>5} "
              + " ".join(f"{t * 1e3:8.2f}ms" for t in row) + f"  {speed}")


if __name__ == "__main__":
    main()
