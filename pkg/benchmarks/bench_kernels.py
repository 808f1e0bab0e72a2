"""Compare the numba-compiled kernels with their pure-numpy forms.

Run from the repository root::

    python3 benchmarks/bench_kernels.py --steps 4000 --dim 3 --repeat 5

Each kernel is called once before timing so compilation is excluded. The
last column is numpy time over numba time; values above 1 mean the compiled
loop is faster. The end-to-end rows rerun whole phase computations in a
subprocess with HOLONOMY_DISABLE_JIT set either way.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from holonomy import _kernels as K
from holonomy.linalg_core import dagger, eig_hermitian, random_hermitian, random_unitary
from holonomy.randomized import random_curve, random_purification


def kernel_inputs(steps: int, n: int, rng: np.random.Generator) -> dict:
    H = np.stack([random_hermitian(n, rng) for _ in range(steps)]) * 1e-2
    steps_u = K.NUMPY_IMPL["expm_hermitian_stack"](H, 1j)
    psi0 = random_purification(n, rng)
    spec = eig_hermitian(dagger(psi0) @ psi0)
    U = K.NUMPY_IMPL["left_cumprod"](steps_u)
    psi = np.ascontiguousarray(U @ psi0)
    starts = np.array([c[0] for c in spec.clusters], dtype=np.int64)
    sizes = np.array([len(c) for c in spec.clusters], dtype=np.int64)
    rho = random_curve(n, rng, steps=steps)
    s = np.linalg.cholesky(rho.mats[0]).astype(np.complex128)
    frames = np.stack([random_unitary(n, rng) for _ in range(steps)])
    return {
        "expm_hermitian_stack": (H, 1j),
        "left_cumprod": (steps_u,),
        "unitary_logs": (steps_u,),
        "connection_increments": (psi, spec.vectors, 1.0 / spec.values, spec.cluster_of.astype(np.int64)),
        "polar_connection_steps": (psi, spec.vectors, starts, sizes),
        "uhlmann_propagate": (np.ascontiguousarray(rho.mats), s / np.linalg.norm(s), rho.grid.dt, 1e-7, 1e-10),
        "align_frames": (frames, np.array([0], dtype=np.int64), np.array([n], dtype=np.int64)),
    }


def best_of(fn, args, repeat: int) -> float:
    fn(*args)
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


END_TO_END = (
    "import time;"
    "from holonomy.scenarios import scenario_trefoil, scenario_slater_triangle;"
    "from holonomy.phases import open_system_phase, uhlmann_phase, interferometric_phase_general;"
    "tr = scenario_trefoil({steps}).build(); sl = scenario_slater_triangle(steps={tri}).build();"
    "open_system_phase(tr.rho); uhlmann_phase(sl.rho); interferometric_phase_general(sl.unitary, sl.rho0);"
    "t = time.perf_counter();"
    "open_system_phase(tr.rho); uhlmann_phase(sl.rho); interferometric_phase_general(sl.unitary, sl.rho0);"
    "print(time.perf_counter() - t)"
)


def end_to_end(steps: int, disable: bool) -> float:
    env = dict(os.environ, HOLONOMY_DISABLE_JIT="1" if disable else "0")
    code = END_TO_END.format(steps=steps, tri=3 * (steps // 3))
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=4000)
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not K.JIT_IMPL:
        print("numba is not importable; nothing to compare")
        return 1

    inputs = kernel_inputs(args.steps, args.dim, np.random.default_rng(args.seed))
    print(f"{'kernel':<26}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, kargs in inputs.items():
        jit = best_of(K.JIT_IMPL[name], kargs, args.repeat)
        ref = best_of(K.NUMPY_IMPL[name], kargs, args.repeat)
        print(f"{name:<26}{jit * 1e3:>12.3f}{ref * 1e3:>12.3f}{ref / jit:>10.2f}")

    jit = end_to_end(args.steps, disable=False)
    ref = end_to_end(args.steps, disable=True)
    print(f"{'end to end (3 phases)':<26}{jit * 1e3:>12.3f}{ref * 1e3:>12.3f}{ref / jit:>10.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
