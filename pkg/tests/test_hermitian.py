import numpy as np
import pytest
import scipy.sparse as sp

from gapwit.errors import NonHermitianError, PreconditionError
from gapwit.hermitian import HermitianOperator


def test_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        HermitianOperator(np.array([[0, 1], [0, 0]]))
    with pytest.raises(PreconditionError):
        HermitianOperator(np.zeros((2, 3)))


def test_immutable():
    h = HermitianOperator(np.eye(2))
    with pytest.raises(ValueError):
        h.matrix[0, 0] = 5


def test_arithmetic_and_storage():
    a = HermitianOperator(sp.csr_matrix(np.diag([1.0, 2.0])))
    b = HermitianOperator(np.array([[0, 1j], [-1j, 0]]))
    c = a + 2 * b - a
    np.testing.assert_allclose(c.toarray(), 2 * b.toarray())
    assert (a + a).is_sparse and not (a + b).is_sparse
    with pytest.raises(NonHermitianError):
        a * 1j
    assert a.shifted(1.0).toarray()[0, 0] == 0.0
    assert b.norm_bound() == 1.0


def test_compress_and_expectation():
    h = HermitianOperator(np.diag([0.0, 1.0, 2.0]))
    q = np.eye(3)[:, 1:]
    np.testing.assert_allclose(h.compress(q).toarray(), np.diag([1.0, 2.0]))
    assert h.expectation(np.array([0, 0, 1.0])) == 2.0
