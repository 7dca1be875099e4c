import functools

import numpy as np
import pytest

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
PAULI = {"x": SX, "y": SY, "z": SZ}


def kron_string(n_sites, factors):
    """Reference Kronecker-product matrix of a Pauli string (site 1 leftmost)."""
    mats = [np.eye(2, dtype=complex)] * n_sites
    mats = list(mats)
    for site, axis in factors:
        mats[site - 1] = PAULI[axis]
    return functools.reduce(np.kron, mats)


def kron_matrix(op):
    out = np.zeros((2**op.n_sites,) * 2, dtype=complex)
    for t in op.terms:
        out += t.coefficient * kron_string(op.n_sites, t.factors)
    return out


def xx_chain_oracle(N):
    """Ground energy and gap of the open gamma=0 chain from its hopping spectrum.

    Odd N has an exact zero mode (degenerate ground state); the gap is then
    the smallest nonzero single-particle energy.
    """
    e = -2 * np.cos(np.pi * np.arange(1, N + 1) / (N + 1))
    a = np.abs(e)
    return float(e[e < 0].sum()), float(a[a > 1e-12].min())


def random_hermitian(rng, d, complex_=True):
    a = rng.standard_normal((d, d))
    if complex_:
        a = a + 1j * rng.standard_normal((d, d))
    return 0.5 * (a + a.conj().T)


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
