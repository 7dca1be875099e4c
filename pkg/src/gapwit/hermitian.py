"""Immutable Hermitian matrices, dense or sparse."""
import numpy as np
import scipy.sparse as sp

from .errors import NonHermitianError, PreconditionError

HERMITIAN_RTOL = 1e-12


class HermitianOperator:
    """A certified Hermitian matrix.

    Storage is either a read-only dense ``ndarray`` or a CSR matrix. All
    arithmetic returns new instances.
    """

    __slots__ = ("_m", "dimension", "is_sparse")

    def __init__(self, matrix, *, check=True, rtol=HERMITIAN_RTOL):
        if sp.issparse(matrix):
            m = sp.csr_matrix(matrix, dtype=np.complex128, copy=True)
            m.sum_duplicates()
            m.eliminate_zeros()
            is_sparse = True
        else:
            m = np.array(matrix, dtype=np.complex128, copy=True)
            if m.ndim != 2:
                raise PreconditionError("operator matrix must be two-dimensional")
            is_sparse = False
        if m.shape[0] != m.shape[1]:
            raise PreconditionError(f"operator matrix must be square, got {m.shape}")
        if check:
            _certify(m, rtol)
        if is_sparse:
            m.data.setflags(write=False)
        else:
            m.setflags(write=False)
        self._m = m
        self.dimension = m.shape[0]
        self.is_sparse = is_sparse

    @property
    def matrix(self):
        return self._m

    def toarray(self):
        if self.is_sparse:
            return self._m.toarray()
        return np.array(self._m)

    def tosparse(self):
        if self.is_sparse:
            return self._m
        return sp.csr_matrix(self._m)

    def matvec(self, x):
        return self._m @ x

    def expectation(self, psi):
        """Real expectation value of a normalized state (or columns)."""
        psi = np.asarray(psi)
        return float(np.real(np.vdot(psi, self._m @ psi)))

    def norm_bound(self):
        """Upper bound on the spectral norm (maximum absolute row sum)."""
        if self.dimension == 0:
            return 0.0
        if self.is_sparse:
            return float(abs(self._m).sum(axis=1).max())
        return float(np.abs(self._m).sum(axis=1).max())

    def compress(self, basis):
        """Dense operator ``Q^H M Q`` for a matrix ``basis`` of orthonormal columns."""
        q = np.asarray(basis)
        return HermitianOperator(_hermitize(q.conj().T @ (self._m @ q)), check=False)

    def shifted(self, c):
        return self + (-c) * identity_like(self)

    # arithmetic with real scalars and other operators
    def __add__(self, other):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        _same_dim(self, other)
        if self.is_sparse and other.is_sparse:
            return HermitianOperator(self._m + other._m, check=False)
        return HermitianOperator(_dense(self._m) + _dense(other._m), check=False)

    def __sub__(self, other):
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        return self + (-1.0) * other

    def __mul__(self, s):
        s = _real_scalar(s)
        return HermitianOperator(self._m * s, check=False)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __matmul__(self, other):
        """Plain matrix product; the result is a raw matrix, not certified."""
        if isinstance(other, HermitianOperator):
            other = other._m
        return self._m @ other

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"HermitianOperator(dimension={self.dimension}, {kind})"


def identity_like(op):
    if op.is_sparse:
        return HermitianOperator(sp.identity(op.dimension, format="csr"), check=False)
    return HermitianOperator(np.eye(op.dimension), check=False)


def as_operator(x):
    if isinstance(x, HermitianOperator):
        return x
    return HermitianOperator(x)


def _certify(m, rtol):
    if sp.issparse(m):
        diff = m - m.conj().T
        scale = abs(m).max() if m.nnz else 0.0
        err = abs(diff).max() if diff.nnz else 0.0
    else:
        scale = np.abs(m).max() if m.size else 0.0
        err = np.abs(m - m.conj().T).max() if m.size else 0.0
    if err > rtol * max(scale, np.finfo(float).tiny):
        raise NonHermitianError(
            f"matrix is not Hermitian: max|M - M^H| = {err:.3e}, max|M| = {scale:.3e}"
        )


def _hermitize(m):
    return 0.5 * (m + m.conj().T)


def _dense(m):
    return m.toarray() if sp.issparse(m) else m


def _same_dim(a, b):
    if a.dimension != b.dimension:
        raise PreconditionError(
            f"operator dimensions differ: {a.dimension} vs {b.dimension}"
        )


def _real_scalar(s):
    if isinstance(s, (complex, np.complexfloating)):
        if s.imag != 0:
            raise NonHermitianError("Hermitian operators only scale by real numbers")
        s = s.real
    return float(s)
