"""Compiled vs numpy pixel kernels on the same jobs.

    python benchmarks/bench_kernels.py [--size 128] [--repeat 3]
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from sinedyn import kernels
from sinedyn.atlas import GridSpec, build_cycles, capture_table, find_cycles
from sinedyn.core import FamilyParams

JOBS = {
    "parabolic lam=1": (FamilyParams(1, 0), 0j, 10_000),
    "fig6 real": (FamilyParams(-1.003, math.pi / 2 - 1.003), math.pi / 2, 2000),
    "escaping lam=2": (FamilyParams(2, 0), 0j, 2000),
}


def run(size: int, repeat: int) -> None:
    backends = kernels.available_backends()
    print(f"{'job':<18} {'backend':<9} {'best s':>8} {'Mpix-it/s':>10}  labels identical")
    for name, (p, center, budget) in JOBS.items():
        g = GridSpec.square(center, 4 * math.pi, size)
        table = capture_table(build_cycles(p, find_cycles(p)))
        xs, ys = g.axes()
        X, Y = np.meshgrid(xs, ys)
        outs = {}
        for b in backends:
            best = math.inf
            for _ in range(repeat):
                t = time.perf_counter()
                res = kernels.classify(X, Y, p.lam, p.a, table, budget, backend=b)
                best = min(best, time.perf_counter() - t)
            outs[b] = res
            work = float(res.iters.astype(np.int64).sum()) / 1e6
            same = ""
            if b != backends[0]:
                ref = outs[backends[0]]
                labels = all(np.array_equal(getattr(ref, k), getattr(res, k))
                             for k in ("label", "iters", "end_idx"))
                # numpy and libm may round sin/cosh differently in the last bit
                rel = float(np.max(np.abs(ref.end - res.end) / np.maximum(1.0, np.abs(ref.end))))
                same = f"{labels}  end rel {rel:.1e}"
            print(f"{name:<18} {b:<9} {best:8.3f} {work / best:10.1f}  {same}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--repeat", type=int, default=3)
    ns = ap.parse_args()
    run(ns.size, ns.repeat)


if __name__ == "__main__":
    main()
