#!/usr/bin/env python3
"""Timing comparison of the compiled and pure scipy sparse kernels.

The backend is fixed at import time (EPRCASCADE_PURE_PYTHON forces the
scipy fallback), so each measurement runs in a subprocess and the parent
prints the side-by-side table:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --dim 2048 --repeats 50
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def measure(dim, repeats, steps):
    from eprcascade import Constant, EffectiveParams, fock, kernels

    rng = np.random.default_rng(7)
    # ladder operator: a single off-diagonal band, nnz = dim - 1, the
    # sparsity pattern every production operator is built from
    (a_op,) = fock.build_ladder((dim,))
    parts = kernels.csr_parts(a_op)
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    out = np.zeros_like(x)

    def best_of(fn):
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        return min(times)

    alpha = 0.5 + 0.25j
    left = best_of(lambda: kernels.spmm_left_acc(*parts, x, out, alpha))
    right = best_of(lambda: kernels.spmm_right_acc(*parts, x, out, alpha))

    # short cascaded run: the realistic mix of left/right products
    p = EffectiveParams(kappa1=1.0, kappa2=1.0, schedule1=Constant(0.1),
                        schedule2=Constant(0.1), epsilon=1.0)
    space = fock.cascade_space((4, 4, 6, 6))
    grid = np.arange(0, steps + 1) * 0.05
    t0 = time.perf_counter()
    fock.evolve(space.vacuum(), p, grid)
    evolve_t = time.perf_counter() - t0

    return {
        "backend": kernels.backend_name(),
        "left_us": 1e6 * left,
        "right_us": 1e6 * right,
        "evolve_s": evolve_t,
    }


def run_worker(args, pure_python):
    env = dict(os.environ)
    if pure_python:
        env["EPRCASCADE_PURE_PYTHON"] = "1"
    else:
        env.pop("EPRCASCADE_PURE_PYTHON", None)
    cmd = [sys.executable, os.path.abspath(__file__), "--worker",
           "--dim", str(args.dim), "--repeats", str(args.repeats),
           "--steps", str(args.steps)]
    proc = subprocess.run(cmd, env=env, capture_output=True, text=True,
                          check=True)
    return json.loads(proc.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dim", type=int, default=1024,
                        help="matrix dimension for the raw kernel timings")
    parser.add_argument("--repeats", type=int, default=20,
                        help="repetitions per kernel (best time reported)")
    parser.add_argument("--steps", type=int, default=20,
                        help="integration steps for the end-to-end timing")
    parser.add_argument("--worker", action="store_true",
                        help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.worker:
        json.dump(measure(args.dim, args.repeats, args.steps), sys.stdout)
        return 0

    compiled = run_worker(args, pure_python=False)
    fallback = run_worker(args, pure_python=True)
    if compiled["backend"] != "cython":
        print("warning: compiled extension unavailable; comparing the "
              "fallback against itself", file=sys.stderr)

    rows = [
        (f"spmm_left_acc ({args.dim}x{args.dim}, us)", "left_us"),
        (f"spmm_right_acc ({args.dim}x{args.dim}, us)", "right_us"),
        (f"evolve {args.steps} steps (s)", "evolve_s"),
    ]
    width = max(len(label) for label, _ in rows)
    print(f"{'workload':<{width}}  {compiled['backend']:>10}  "
          f"{fallback['backend']:>10}  {'ratio':>6}")
    for label, key in rows:
        ratio = fallback[key] / compiled[key]
        print(f"{label:<{width}}  {compiled[key]:>10.3f}  "
              f"{fallback[key]:>10.3f}  {ratio:>6.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
