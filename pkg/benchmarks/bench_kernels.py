#!/usr/bin/env python3
"""Benchmark: compiled integration kernels vs the NumPy reference.

Times the closed-loop substep kernel, the shooting rollout, and the adjoint
pass on the simulation model, then reports an end-to-end trajectory
optimization solve on each backend.

    python benchmarks/bench_kernels.py
"""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from attsafe import _kern
from attsafe._kern import _numpy as ref
from attsafe.dynamics import SpacecraftState, table1_model
from attsafe.mathcore import euler321_to_mrp
from attsafe.ocp import solve_ocp


def _time(fn, min_runs=5, min_time=0.3):
    fn()  # warm up
    runs = 0
    t0 = time.perf_counter()
    while True:
        fn()
        runs += 1
        elapsed = time.perf_counter() - t0
        if runs >= min_runs and elapsed >= min_time:
            return elapsed / runs


def main():
    model = table1_model()
    rng = np.random.default_rng(0)
    x0 = np.concatenate([rng.uniform(-0.8, 0.8, 3), np.zeros(3), np.zeros(3)])
    u = rng.uniform(-0.1, 0.1, 3)
    U = rng.uniform(-0.1, 0.1, (100, 3))
    xbar = rng.standard_normal((101, 9))

    if _kern.BACKEND == "numpy":
        print("compiled extension not built; run `python setup.py build_ext --inplace`")
        print("benchmarking the NumPy backend against itself is uninformative")
        return

    cases = [
        ("step_zoh (1 control period, 10 substeps)",
         lambda k: k.step_zoh(model.J, model.Jinv, x0, u, 0.01, 10)),
        ("shoot_nodes (100 segments x 2 substeps)",
         lambda k: k.shoot_nodes(model.J, model.Jinv, x0, U, 0.5, 2)),
        ("shoot_vjp (adjoint over the same rollout)",
         lambda k: k.shoot_vjp(model.J, model.Jinv, x0, U, 0.5, 2, xbar)),
    ]
    print(f"{'kernel':45s} {'numpy':>12s} {'compiled':>12s} {'speedup':>9s}")
    for name, call in cases:
        t_np = _time(lambda: call(ref))
        t_cy = _time(lambda: call(_kern))
        print(f"{name:45s} {t_np * 1e3:9.3f} ms {t_cy * 1e3:9.3f} ms {t_np / t_cy:8.0f}x")

    # end-to-end: one energy-optimal solve on each backend
    sc_x0 = SpacecraftState.rest(euler321_to_mrp(np.radians([140.0, 20.0, 100.0])))
    t0 = time.perf_counter()
    solve_ocp(model, sc_x0, 44.0, 100)
    t_fast = time.perf_counter() - t0
    print(f"\nsolve_ocp(T=44, N=100) on the compiled backend: {t_fast:8.2f} s")
    print("re-run with ATTSAFE_PURE_PYTHON=1 for the reference-backend figure")


if __name__ == "__main__":
    main()
