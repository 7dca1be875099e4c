"""Hot loops over computational basis states.

Every kernel has a numba version and a pure-numpy version with identical
semantics. The numba path is used when numba imports and ``GAPWIT_NUMBA`` is
not set to a false value (``0``, ``false``, ``off``, ``no``).

A Pauli string is encoded by two bit masks over basis-state integers: ``flip``
(sites carrying x or y) and ``sign`` (sites carrying y or z). Its action is
``P|s> = c * (-1)**popcount(s & sign) |s ^ flip>`` with ``c`` absorbing the
``i**n_y`` phase and the term coefficient.
"""
import os

import numpy as np

_FALSE = {"0", "false", "off", "no"}


def _numba_requested():
    return os.environ.get("GAPWIT_NUMBA", "1").strip().lower() not in _FALSE


try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _numba_requested()


def _parity_numpy(x):
    # popcount parity of uint64 array by bit folding
    x = x.copy()
    for shift in (32, 16, 8, 4, 2, 1):
        x ^= x >> np.uint64(shift)
    return (x & np.uint64(1)).astype(np.int8)


def pauli_coo_numpy(flips, signs, coeffs, dim):
    n_terms = len(flips)
    states = np.arange(dim, dtype=np.uint64)
    rows = np.empty(n_terms * dim, dtype=np.int64)
    cols = np.empty(n_terms * dim, dtype=np.int64)
    data = np.empty(n_terms * dim, dtype=np.complex128)
    for t in range(n_terms):
        sl = slice(t * dim, (t + 1) * dim)
        rows[sl] = states ^ np.uint64(flips[t])
        cols[sl] = states
        par = _parity_numpy(states & np.uint64(signs[t]))
        data[sl] = coeffs[t] * (1 - 2 * par)
    return rows, cols, data


def pauli_apply_numpy(flips, signs, coeffs, x):
    dim = x.shape[0]
    states = np.arange(dim, dtype=np.uint64)
    out = np.zeros(dim, dtype=np.complex128)
    for t in range(len(flips)):
        par = _parity_numpy(states & np.uint64(signs[t]))
        # out[s ^ flip] += c * sign(s) * x[s]
        target = (states ^ np.uint64(flips[t])).astype(np.int64)
        out[target] += coeffs[t] * (1 - 2 * par) * x
    return out


if numba is not None:

    @numba.njit(cache=True, inline="always")
    def _parity(v):
        v ^= v >> 32
        v ^= v >> 16
        v ^= v >> 8
        v ^= v >> 4
        v ^= v >> 2
        v ^= v >> 1
        return v & 1

    @numba.njit(cache=True)
    def pauli_coo_numba(flips, signs, coeffs, dim):
        n_terms = flips.shape[0]
        rows = np.empty(n_terms * dim, dtype=np.int64)
        cols = np.empty(n_terms * dim, dtype=np.int64)
        data = np.empty(n_terms * dim, dtype=np.complex128)
        k = 0
        for t in range(n_terms):
            f = flips[t]
            m = signs[t]
            c = coeffs[t]
            for s in range(dim):
                rows[k] = s ^ f
                cols[k] = s
                if _parity(s & m):
                    data[k] = -c
                else:
                    data[k] = c
                k += 1
        return rows, cols, data

    @numba.njit(cache=True)
    def pauli_apply_numba(flips, signs, coeffs, x):
        dim = x.shape[0]
        out = np.zeros(dim, dtype=np.complex128)
        for t in range(flips.shape[0]):
            f = flips[t]
            m = signs[t]
            c = coeffs[t]
            for s in range(dim):
                if _parity(s & m):
                    out[s ^ f] -= c * x[s]
                else:
                    out[s ^ f] += c * x[s]
        return out

else:  # pragma: no cover
    pauli_coo_numba = None
    pauli_apply_numba = None


def pauli_coo(flips, signs, coeffs, dim):
    """COO triplets of ``sum_t coeffs[t] * P_t`` over a ``dim``-state basis."""
    flips = np.ascontiguousarray(flips, dtype=np.int64)
    signs = np.ascontiguousarray(signs, dtype=np.int64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    if USE_NUMBA:
        return pauli_coo_numba(flips, signs, coeffs, int(dim))
    return pauli_coo_numpy(flips, signs, coeffs, int(dim))


def pauli_apply(flips, signs, coeffs, x):
    """Matrix-free product ``(sum_t coeffs[t] * P_t) @ x``."""
    flips = np.ascontiguousarray(flips, dtype=np.int64)
    signs = np.ascontiguousarray(signs, dtype=np.int64)
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    x = np.ascontiguousarray(x, dtype=np.complex128)
    if USE_NUMBA:
        return pauli_apply_numba(flips, signs, coeffs, x)
    return pauli_apply_numpy(flips, signs, coeffs, x)
