"""Compare the numba and numpy Pauli kernels on XY + witness operators.

Usage: python3 benchmarks/bench_kernels.py [--N 10 12 14] [--repeat 5]
"""

import argparse
import time

import numpy as np

from gapwit import _kernels
from gapwit.pauli import build_witness, build_xy, string_masks


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, nargs="+", default=[10, 12, 14])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if _kernels.pauli_coo_numba is None:
        raise SystemExit("numba is not installed")

    print(f"{'N':>3} {'kernel':>6} {'numpy [s]':>10} {'numba [s]':>10} {'speedup':>8}")
    for N in args.N:
        op = build_xy(N, 0.5) + 0.3 * build_witness(N)
        flips, signs, coeffs = string_masks(op)
        dim = 1 << N
        x = np.random.default_rng(0).normal(size=dim).astype(complex)

        # warm up (compiles the jitted kernels) and check agreement
        r1, c1, d1 = _kernels.pauli_coo_numba(flips, signs, coeffs, dim)
        r0, c0, d0 = _kernels.pauli_coo_numpy(flips, signs, coeffs, dim)
        assert np.array_equal(r0, r1) and np.array_equal(c0, c1) and np.allclose(d0, d1)
        y1 = _kernels.pauli_apply_numba(flips, signs, coeffs, x)
        y0 = _kernels.pauli_apply_numpy(flips, signs, coeffs, x)
        assert np.allclose(y0, y1, atol=1e-12)

        for name, fnp, fnb in (
            ("coo", lambda: _kernels.pauli_coo_numpy(flips, signs, coeffs, dim),
             lambda: _kernels.pauli_coo_numba(flips, signs, coeffs, dim)),
            ("apply", lambda: _kernels.pauli_apply_numpy(flips, signs, coeffs, x),
             lambda: _kernels.pauli_apply_numba(flips, signs, coeffs, x)),
        ):
            tn, tb = best_of(fnp, args.repeat), best_of(fnb, args.repeat)
            print(f"{N:>3} {name:>6} {tn:>10.4f} {tb:>10.4f} {tn / tb:>7.1f}x")


if __name__ == "__main__":
    main()
