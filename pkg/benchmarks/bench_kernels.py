"""Time the compiled and numpy RK4 propagators on the same problem.

    python3 benchmarks/bench_kernels.py [--N 4000] [--steps 2000]

Reports microseconds per RK4 step for the Dicke-sector and Bloch kernels
and the largest difference between the two backends' results.
"""

import argparse
import time

import numpy as np

from sta_anneal import _pykernels
from sta_anneal.quantum import STEP_CFL, coherent_plus_x_state, spectral_width

try:
    from sta_anneal import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _dicke_inputs(N, steps):
    g = 2 * steps + 1
    s = np.linspace(0.0, 1.0, g)
    a = -2.0 * s / N
    b = -0.2 * s
    cx = -2.0 * (1.0 - s)
    cy = 0.3 * np.sin(np.pi * s)
    return coherent_plus_x_state(N), a, b, cx, cy


def _time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_dicke(mod, N, steps, repeat):
    psi0, a, b, cx, cy = _dicke_inputs(N, steps)
    # half the stability limit, so the benchmark measures a converging run
    dt = 0.5 * STEP_CFL / np.max(spectral_width(a, b, cx, cy, N))

    def go():
        psi = psi0.copy()
        mom = mod.dicke_rk4(psi, a, b, cx, cy, dt, steps, steps, True)
        return psi, mom

    return _time(go, repeat)


def bench_bloch(mod, steps, repeat):
    g = 2 * steps + 1
    s = np.linspace(0.0, 1.0, g)
    bx, by, bz, jz = -2.0 * (1.0 - s), np.zeros(g), -0.2 * s, -2.0 * s
    n0 = np.array([1.0, 0.0, 0.0])
    return _time(lambda: mod.bloch_rk4(n0, bx, by, bz, jz, 10.0 / steps, steps, True), repeat)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--N", type=int, default=4000)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--bloch-steps", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    backends = [("numpy", _pykernels)]
    if _ckernels is not None:
        backends.insert(0, ("cython", _ckernels))
    else:
        print("compiled core not available; timing the numpy fallback only")

    results = {}
    print(f"Dicke sector, N = {args.N}, {args.steps} steps")
    for name, mod in backends:
        sec, out = bench_dicke(mod, args.N, args.steps, args.repeat)
        results[name] = out
        print(f"  {name:7s} {1e6 * sec / args.steps:10.1f} us/step")
    if len(results) == 2:
        (pc, _), (pp, _) = results["cython"], results["numpy"]
        print(f"  max |psi_cython - psi_numpy| = {np.max(np.abs(pc - pp)):.2e}")

    bl = {}
    print(f"Bloch vector, {args.bloch_steps} steps")
    for name, mod in backends:
        sec, out = bench_bloch(mod, args.bloch_steps, 1)
        bl[name] = out
        print(f"  {name:7s} {1e6 * sec / args.bloch_steps:10.3f} us/step")
    if len(bl) == 2:
        print(f"  max |n_cython - n_numpy| = {np.max(np.abs(bl['cython'] - bl['numpy'])):.2e}")


if __name__ == "__main__":
    main()
