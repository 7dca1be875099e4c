import numpy as np
import pytest

from gapwit import _kernels
from gapwit.pauli import build_witness, build_xy, string_masks

pytestmark = pytest.mark.skipif(_kernels.pauli_coo_numba is None, reason="numba unavailable")


@pytest.mark.parametrize("op", [build_xy(5, 0.3), build_witness(6), build_xy(7, 1.0) + build_witness(7)])
def test_coo_numba_equals_numpy(op):
    masks = string_masks(op)
    dim = 1 << op.n_sites
    a = _kernels.pauli_coo_numpy(*masks, dim)
    b = _kernels.pauli_coo_numba(*masks, dim)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


def test_apply_numba_equals_numpy(rng):
    op = build_xy(8, 0.4) + 0.3 * build_witness(8)
    masks = string_masks(op)
    x = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    np.testing.assert_allclose(
        _kernels.pauli_apply_numba(*masks, x), _kernels.pauli_apply_numpy(*masks, x), rtol=0, atol=1e-13
    )


def test_parity_numpy():
    v = np.arange(1024, dtype=np.uint64)
    ref = np.array([bin(int(i)).count("1") & 1 for i in v])
    np.testing.assert_array_equal(_kernels._parity_numpy(v), ref)


def test_env_flag(monkeypatch):
    monkeypatch.setenv("GAPWIT_NUMBA", "off")
    assert not _kernels._numba_requested()
    monkeypatch.setenv("GAPWIT_NUMBA", "1")
    assert _kernels._numba_requested()


def test_dispatch_fallback(monkeypatch):
    op = build_xy(4, 0.2)
    masks = string_masks(op)
    monkeypatch.setattr(_kernels, "USE_NUMBA", False)
    a = _kernels.pauli_coo(*masks, 16)
    monkeypatch.setattr(_kernels, "USE_NUMBA", True)
    b = _kernels.pauli_coo(*masks, 16)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
