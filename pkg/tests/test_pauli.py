import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import kron_matrix
from gapwit.errors import CapacityError, InvalidSizeError, NonHermitianError, PreconditionError
from gapwit.pauli import (
    PauliSum,
    PauliTerm,
    apply,
    build_tapered,
    build_witness,
    build_xy,
    identity,
    pauli_add,
    pauli_compose,
    pauli_scale,
    single,
    sparse_matrix,
    taper_weight,
    taper_weights,
    to_matrix,
)
from gapwit.spectra import eig_dense


def test_term_validation():
    with pytest.raises(PreconditionError):
        PauliTerm(1.0, ((2, "x"), (1, "z")))
    with pytest.raises(PreconditionError):
        PauliTerm(1.0, ((1, "w"),))
    with pytest.raises(PreconditionError):
        PauliTerm(float("nan"), ((1, "x"),))


def test_merge_and_drop():
    s = PauliSum(2, [PauliTerm(0.5, ((1, "x"),)), PauliTerm(0.5, ((1, "x"),)), PauliTerm(1e-15, ((2, "z"),))])
    assert len(s) == 1
    assert s.coefficient(((1, "x"),)) == 1.0
    assert s.coefficient(((2, "z"),)) == 0.0


def test_site_out_of_range():
    with pytest.raises(PreconditionError):
        PauliSum(2, [PauliTerm(1.0, ((3, "x"),))])


def test_xy_two_sites_gamma_one():
    h = build_xy(2, 1.0)
    assert len(h) == 1
    assert h.coefficient(((1, "x"), (2, "x"))) == -1.0


def test_xy_three_sites_isotropic():
    h = build_xy(3, 0.0)
    assert len(h) == 4
    assert all(t.coefficient == -0.5 for t in h.terms)


@pytest.mark.parametrize("N,gamma", [(4, 0.3), (7, -0.5), (5, 2.0)])
def test_xy_term_count(N, gamma):
    assert len(build_xy(N, gamma)) == 2 * (N - 1)


def test_xy_invalid_size():
    with pytest.raises(InvalidSizeError):
        build_xy(1, 0.0)


def test_xy_ground_energy_frozen():
    # dense diagonalization of the 256 x 256 Kronecker matrix, frozen
    e = eig_dense(to_matrix(build_xy(8, 0.5))).eigenvalues[0]
    assert abs(e - (-5.4469269889801994)) <= 1e-10


def test_witness_counts():
    v3 = build_witness(3)
    assert len(v3) == 2
    assert {f[0] for t in v3.terms for f in t.factors} == {1, 2, 3}
    assert len(build_witness(5)) == 6
    with pytest.raises(InvalidSizeError):
        build_witness(2)


def test_witness_is_not_xy_ground_eigenvector_on_open_chain():
    # the open-chain XY ground state is *not* an eigenvector of the witness
    H, V = to_matrix(build_xy(8, 0.0)), to_matrix(build_witness(8))
    g = eig_dense(H).eigenvectors[:, 0]
    vg = V.matrix @ g
    res = np.linalg.norm(vg - np.vdot(g, vg) * g)
    assert res > 0.1


def test_to_matrix_against_kron(rng):
    for op in (build_xy(4, 0.3), build_witness(4), single(3, 2, "y", 0.7) + single(3, 1, "z")):
        np.testing.assert_allclose(to_matrix(op).toarray(), kron_matrix(op), atol=1e-14)


def test_sigma_z_first_site():
    np.testing.assert_array_equal(np.real(to_matrix(single(2, 1, "z")).toarray()), np.diag([1, 1, -1, -1]))


def test_xy2_gamma1_spectrum():
    np.testing.assert_allclose(np.linalg.eigvalsh(to_matrix(build_xy(2, 1)).toarray()), [-1, -1, 1, 1], atol=1e-14)


def test_witness3_hermitian_traceless():
    m = to_matrix(build_witness(3)).toarray()
    np.testing.assert_allclose(m, m.conj().T, atol=1e-15)
    assert abs(np.trace(m)) < 1e-14


def test_capacity():
    with pytest.raises(CapacityError):
        to_matrix(build_xy(21, 0.0))
    with pytest.raises(CapacityError):
        to_matrix(build_xy(13, 0.0), dense=True)


def test_taper_weights():
    N, m = 10, 4
    assert taper_weight(1, N, m) == 0.0
    assert taper_weight(m, N, m) == pytest.approx(0.5 * (1 - np.cos(np.pi * (m - 1) / m)))
    for i in range(m + 1, N - m + 1):
        assert taper_weight(i, N, m) == 1.0
    w = taper_weights(N, m)
    np.testing.assert_allclose(w, w[::-1], atol=1e-15)
    assert np.all((w >= 0) & (w <= 1))
    with pytest.raises(IndexError):
        taper_weight(0, N, m)
    with pytest.raises(IndexError):
        taper_weight(N + 2 * m + 1, N, m)


def test_taper_weights_bulk_length():
    w = taper_weights(100, 50)
    assert len(w) == 200
    assert np.all(w[50:150] == 1.0)
    assert np.all(w[:50] < 1.0)


def test_tapered_m0_matches_untapered():
    H, V = build_tapered(6, 0, 0.4)
    assert H == build_xy(6, 0.4)
    assert V == build_witness(6)


def test_tapered_edges_and_bulk():
    H, V = build_tapered(100, 50, 0.0)
    assert H.n_sites == V.n_sites == 200
    assert H.coefficient(((1, "x"), (2, "x"))) == 0.0
    assert V.coefficient(((1, "x"), (2, "z"), (3, "y"))) == 0.0
    assert abs(H.coefficient(((100, "x"), (101, "x"))) + 0.5) <= 1e-15
    assert abs(V.coefficient(((99, "x"), (100, "z"), (101, "y"))) - 1.0) <= 1e-15


def test_compose_basics():
    x = single(1, 1, "x")
    assert pauli_compose(x, x) == identity(1)
    z = single(1, 1, "z")
    assert pauli_compose(z, z) == identity(1)
    with pytest.raises(NonHermitianError):
        pauli_compose(x, single(1, 1, "y"))
    with pytest.raises(PreconditionError):
        pauli_compose(x, single(2, 1, "x"))


_axes = st.sampled_from(["x", "y", "z"])


@st.composite
def pauli_sums(draw, n=3):
    terms = []
    for _ in range(draw(st.integers(1, 5))):
        sites = sorted(draw(st.sets(st.integers(1, n), min_size=1, max_size=n)))
        coeff = draw(st.floats(-2, 2, allow_nan=False).filter(lambda c: abs(c) > 1e-3))
        terms.append(PauliTerm(coeff, tuple((s, draw(_axes)) for s in sites)))
    return PauliSum(n, terms)


@settings(max_examples=60, deadline=None)
@given(pauli_sums(), pauli_sums())
def test_compose_matches_matrix_product(a, b):
    prod = pauli_compose(a, b, hermitian=False)
    np.testing.assert_allclose(
        sparse_matrix(prod).toarray(), kron_matrix(a) @ kron_matrix(b), atol=1e-12
    )


@settings(max_examples=40, deadline=None)
@given(pauli_sums(), pauli_sums(), st.floats(-3, 3))
def test_add_scale_linear(a, b, s):
    lhs = sparse_matrix(pauli_add(a, pauli_scale(b, s))).toarray()
    np.testing.assert_allclose(lhs, kron_matrix(a) + s * kron_matrix(b), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(pauli_sums())
def test_matrix_hermitian(a):
    m = to_matrix(a).toarray()
    assert np.abs(m - m.conj().T).max() <= 1e-12 * max(np.abs(m).max(), 1e-300)


def test_square_of_hamiltonian_hermitian():
    h = build_xy(4, 0.3)
    h2 = pauli_compose(h, h)
    m = to_matrix(h).toarray()
    np.testing.assert_allclose(to_matrix(h2).toarray(), m @ m, atol=1e-12)


def test_json_roundtrip():
    h = build_xy(4, 0.3) + 0.5 * build_witness(4)
    s = h.to_json()
    assert json.loads(s)["n_sites"] == 4
    assert PauliSum.from_json(s) == h


def test_apply_matches_matrix(rng):
    op = build_xy(6, 0.3) + build_witness(6)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    np.testing.assert_allclose(apply(op, x), to_matrix(op).matrix @ x, atol=1e-12)
    X = rng.standard_normal((64, 3))
    np.testing.assert_allclose(apply(op, X), to_matrix(op).matrix @ X, atol=1e-12)
