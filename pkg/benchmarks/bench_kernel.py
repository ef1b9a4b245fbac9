"""Timing: compiled path-tracking kernel vs the pure-Python twin.

Runs the same dense random systems through both backends, reports wall
time per backend and the largest deviation between the solution sets.
Both backends follow identical arithmetic, so the deviation should be
exactly zero; anything else points at a kernel divergence.

Usage: python3 benchmarks/bench_kernel.py [--repeat N]
"""

import argparse
import time

import numpy as np

from fop.equipoly import monomials
from fop.psolve import PolySystem, available_backends, solve_system
from fop.tolerances import SOLVE_SEED


def _suite():
    rng = np.random.Generator(np.random.Philox(key=0xBE7C))
    cases = []
    for nvars, degs, copies in (
        (1, (8,), 3),
        (2, (3, 3), 3),
        (2, (4, 4), 2),
        (3, (2, 2, 2), 2),
        (3, (3, 3, 2), 1),
    ):
        for _ in range(copies):
            eqs = []
            for d in degs:
                mons = monomials(nvars, d)
                coefs = (
                    rng.normal(size=len(mons)) + 1j * rng.normal(size=len(mons))
                ) / np.sqrt(2.0)
                eqs.append([(m, complex(c)) for m, c in zip(mons, coefs)])
            cases.append(PolySystem(nvars, eqs))
    return cases


def _run(cases, backend):
    start = time.perf_counter()
    sols = [solve_system(s, seed=SOLVE_SEED, backend=backend) for s in cases]
    return time.perf_counter() - start, sols


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3, help="timing repetitions")
    args = parser.parse_args()

    cases = _suite()
    paths = sum(s.bezout for s in cases)
    backends = available_backends()
    print(f"{len(cases)} systems, {paths} continuation paths, backends: {backends}")

    results = {}
    for backend in backends:
        _run(cases, backend)  # warm-up: caches, imports
        best, sols = min(
            (_run(cases, backend) for _ in range(args.repeat)), key=lambda t: t[0]
        )
        results[backend] = (best, sols)
        print(f"  {backend:>8}: {best * 1e3:8.1f} ms  ({paths / best:,.0f} paths/s)")

    if len(results) == 2:
        (fast, (tf, sf)), (slow, (ts, ss)) = sorted(
            results.items(), key=lambda kv: kv[1][0]
        )
        dev = 0.0
        for a, b in zip(sf, ss):
            if a.points.shape != b.points.shape:
                dev = float("inf")
                break
            if a.points.size:
                dev = max(dev, float(np.max(np.abs(a.points - b.points))))
        print(f"  speedup: {ts / tf:.1f}x ({fast} over {slow})")
        print(f"  max deviation between backends: {dev:.3e}")


if __name__ == "__main__":
    main()
