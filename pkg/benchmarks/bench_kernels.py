"""Time the delta-mass quadrature kernels on both backends.

    python3 benchmarks/bench_kernels.py [--res 64 128 256] [--repeat 3]

The numba timing excludes the first (compiling) call. Both backends must
return the same sum; the script reports the largest relative difference.
"""

import argparse
import time

from driftlap import _kernels
from driftlap import grushin as G
from driftlap.params import DriftParams
from driftlap.verify import delta


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _cases(res):
    prm = DriftParams(3.0, 0.3)
    const, q, a, b = delta.h_prefactor(prm)
    xi, wx = _kernels.sinh_axis(3.0 / 0.05, res)
    ze, wz = _kernels.sinh_axis(9.0 / 0.05**2, res)
    yield "heisenberg", lambda w: _kernels.h_density_sum(q, a, b, xi, wx, ze, wz, w)

    shape = G.GrushinShape(0.0, 0.0, 1.0, 1)
    const, q, A, B = delta.g_prefactor(shape, prm)
    T, wt = _kernels.sinh_axis(3.0 / 0.05, res)
    S, ws = _kernels.sinh_axis(9.0 / 0.05**2, res)
    yield "grushin", lambda w: _kernels.g_density_sum(1, 1.0, q, A, B, T, wt, S, ws, w)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--res", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"{'space':<11}{'res':>6}{'numpy [ms]':>13}{'numba [ms]':>13}{'speedup':>9}{'rel diff':>11}")
    for res in args.res:
        for name, run in _cases(res):
            run("numba")  # compile outside the timed region
            t_np, v_np = _best(lambda: run("numpy"), args.repeat)
            t_nb, v_nb = _best(lambda: run("numba"), args.repeat)
            diff = abs(v_np - v_nb) / max(abs(v_np), 1e-300)
            print(
                f"{name:<11}{res:>6}{t_np * 1e3:>13.2f}{t_nb * 1e3:>13.2f}"
                f"{t_np / t_nb:>9.1f}{diff:>11.1e}"
            )


if __name__ == "__main__":
    main()
