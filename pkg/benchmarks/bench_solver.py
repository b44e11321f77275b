"""Timing comparison of the two direction-solver kernels.

Runs the same seeded workloads through the compiled extension and the pure
numpy fallback and prints a table of wall times plus the objective gap
(which must be ~0: both kernels implement the identical iteration).

Usage: python benchmarks/bench_solver.py [--sizes SMALL|FULL]
"""

import argparse
import importlib
import time

import numpy as np

import ipursuit.solver as solver
from ipursuit.datagen import make_ensemble_fully_random, sample_points
from ipursuit.linalg import seeded_rng
from ipursuit.solver import SolverConfig


def make_problem(M, K, m, s, n, seed):
    rng = seeded_rng(seed)
    ens = make_ensemble_fully_random(M, K, m, s, rng)
    return sample_points(ens, n, rng)


def run_backend(backend, D, config):
    solver._kernel = backend
    t0 = time.perf_counter()
    result = solver.all_directions(D, config)
    elapsed = time.perf_counter() - t0
    return elapsed, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", choices=["small", "full"], default="small")
    args = parser.parse_args()

    try:
        compiled = importlib.import_module("ipursuit._solver_cy")
    except ImportError:
        print("compiled backend unavailable; build the extension first")
        return
    fallback = importlib.import_module("ipursuit._solver_py")

    if args.sizes == "small":
        cases = [
            ("M=30 K=4 m=5 s=2 n=25", (30, 4, 5, 2, 25)),
            ("M=60 K=10 m=12 s=10 n=20", (60, 10, 12, 10, 20)),
        ]
    else:
        cases = [
            ("M=60 K=10 m=22 s=20 n=50", (60, 10, 22, 20, 50)),
            ("M=60 K=10 m=42 s=40 n=50", (60, 10, 42, 40, 50)),
            ("M=100 K=5 m=10 s=0 n=60", (100, 5, 10, 0, 60)),
        ]

    config = SolverConfig(primal_tol=1e-6, dual_tol=1e-6, max_iters=5000)
    saved = solver._kernel
    print(f"{'case':34s} {'compiled':>10s} {'python':>10s} {'speedup':>8s} {'max|dObj|':>10s}")
    try:
        for label, dims in cases:
            D = make_problem(*dims, seed=11)
            t_c, r_c = run_backend(compiled, D, config)
            t_p, r_p = run_backend(fallback, D, config)
            gap = float(np.abs(r_c.objectives - r_p.objectives).max())
            print(f"{label:34s} {t_c:9.3f}s {t_p:9.3f}s {t_p / t_c:7.1f}x {gap:10.2e}")
    finally:
        solver._kernel = saved


if __name__ == "__main__":
    main()
