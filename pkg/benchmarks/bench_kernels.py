"""Time the numba and pure-numpy eigen kernels on dilated oscillator matrices.

    python benchmarks/bench_kernels.py --sizes 50 100 200 --repeat 3

The numpy path is what ``ODDBOREL_DISABLE_NUMBA=1`` selects at import time.
"""

import argparse
import time

import numpy as np

from oddborel import OscillatorSpec, build_scaled_hamiltonian
from oddborel import kernels


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench(N, repeat):
    h = build_scaled_hamiltonian(OscillatorSpec(1), 0.04, 0.5226, N)
    A = h.matrix
    rows = {}
    for name, hess, hqr in (("numba", kernels.hessenberg_nb, kernels.hqr_nb),
                             ("numpy", kernels.hessenberg_np, kernels.hqr_np)):
        t, (vals, _, status) = _best(lambda: hqr(hess(A), 60), repeat)
        rows[name] = (t, vals, status)
    # the upper spectrum of the truncated non-normal operator is ill-conditioned,
    # so accuracy is judged on the ten lowest levels only
    ref = np.linalg.eigvals(A)
    ref = ref[np.argsort(np.abs(ref))][:10]
    for name, (t, vals, status) in rows.items():
        err = max(np.min(np.abs(vals - r)) for r in ref)
        print(f"N={N:4d}  {name:5s}  {t:8.4f} s  status={status}  low-level |dE| vs LAPACK={err:.2e}")
    print(f"N={N:4d}  speedup numba/numpy = {rows['numpy'][0] / rows['numba'][0]:.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    # compile once outside the timings
    kernels.hqr_nb(kernels.hessenberg_nb(np.eye(4, dtype=np.complex128)), 60)
    for N in args.sizes:
        bench(N, args.repeat)


if __name__ == "__main__":
    main()
