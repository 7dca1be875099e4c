import numpy as np
import pytest

from gapwit.errors import MappingError, ParticleHoleError, PreconditionError
from gapwit.freefermion import (
    DispersionParams,
    QuadraticFermionModel,
    bdg_diagonalize,
    bdg_gap,
    dispersion_row,
    ground_energy_momentum,
    ground_state,
    hf_expectations,
    jw_map,
    min_quasiparticle_energy_momentum,
    momentum_grid,
    quasiparticle_energy,
)
from gapwit.pauli import PauliSum, PauliTerm, build_tapered, build_witness, build_xy, single, to_matrix
from gapwit.spectra import eig_dense, eig_lowest


def test_momentum_grid():
    np.testing.assert_allclose(momentum_grid(2), [-np.pi / 2, np.pi / 2])
    np.testing.assert_allclose(momentum_grid(4), np.pi * np.array([-3, -1, 1, 3]) / 4)
    for N in (10, 11):
        k = momentum_grid(N)
        assert len(k) == N and abs(k.sum()) < 1e-12
        np.testing.assert_allclose(np.sort(-k), k, atol=1e-15)
    # even N avoids 0 and pi; odd N necessarily contains k = 0
    k = momentum_grid(10)
    assert np.all(np.abs(k) > 1e-12) and np.all(np.abs(np.abs(k) - np.pi) > 1e-12)
    assert np.min(np.abs(momentum_grid(11))) < 1e-15


def test_dispersion_values():
    assert quasiparticle_energy(np.pi / 2, 0.0, 0.0) == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(quasiparticle_energy(np.linspace(-3, 3, 7), 1.0, 0.0), 1.0)
    assert quasiparticle_energy(np.pi / 4, 0.0, 1.0) == pytest.approx(1 + np.sqrt(2) / 2)


def test_momentum_ground_energy():
    assert ground_energy_momentum(DispersionParams(2, 1.0, 0.0)) == pytest.approx(-2.0)
    e = ground_energy_momentum(DispersionParams(4000, 0.0, 0.0)) / 4000
    assert abs(e + 2 / np.pi) < 1e-6


def test_momentum_vs_exact_per_site():
    diffs = []
    for N in (6, 8, 10, 12):
        ed = eig_lowest(to_matrix(build_xy(N, 0.5)), 1).eigenvalues[0]
        diffs.append(abs(ground_energy_momentum(DispersionParams(N, 0.5)) - ed) / N)
    assert all(b < a for a, b in zip(diffs, diffs[1:]))


def test_momentum_vs_real_space_per_site():
    def diff(N):
        bdg = bdg_diagonalize(jw_map(build_xy(N, 0.3))).ground_energy
        return abs(bdg - ground_energy_momentum(DispersionParams(N, 0.3))) / N

    assert diff(128) < diff(32)


def test_hf_at_zero_coupling():
    for g in (0.0, 0.4, 1.0):
        v, h = hf_expectations(DispersionParams(12, g, 0.0))
        assert abs(v) < 1e-12
        assert h == pytest.approx(ground_energy_momentum(DispersionParams(12, g, 0.0)))


@pytest.mark.parametrize("gamma", [0.0, 0.3, 1.0])
@pytest.mark.parametrize("t", [0.0, 0.1, 0.45])
def test_hf_finite_difference(gamma, t):
    h = 1e-5
    f = lambda s: ground_energy_momentum(DispersionParams(64, gamma, s))  # noqa: E731
    v, _ = hf_expectations(DispersionParams(64, gamma, t))
    assert abs(v - (f(t + h) - f(t - h)) / (2 * h)) <= 1e-6


def _open_chain_expectations(N, gamma, t):
    # momentum t corresponds to coupling t/2 on the spin witness, and <V_spin> = 2 <V>
    H, V = build_xy(N, gamma), build_witness(N)
    st = ground_state(jw_map(H, V, t / 2))
    return st.expectation(jw_map(V)) / 2, st.expectation(jw_map(H))


def _per_site_error(N, gamma, t):
    v_m, h_m = hf_expectations(DispersionParams(N, gamma, t))
    v, h = _open_chain_expectations(N, gamma, t)
    return (abs(v_m - v) + abs(h_m - h)) / N


def test_hf_vs_exact_expectations_at_12():
    N, t = 12, 0.2
    H, V = build_xy(N, 0.0), build_witness(N)
    sol = eig_lowest(to_matrix(H + (t / 2) * V), 1)
    g = sol.eigenvectors[:, 0]
    ed = (np.real(np.vdot(g, to_matrix(V).matrix @ g)) / 2, np.real(np.vdot(g, to_matrix(H).matrix @ g)))
    np.testing.assert_allclose(_open_chain_expectations(N, 0.0, t), ed, atol=1e-9)
    assert _per_site_error(N, 0.0, t) < 0.05


@pytest.mark.parametrize("gamma,t", [(0.0, 0.2), (0.0, 0.4), (0.5, 0.0), (1.0, 0.0)])
def test_hf_boundary_error_decreases(gamma, t):
    # compare within one residue class of N mod 4 (the boundary term oscillates)
    errs = [_per_site_error(N, gamma, t) for N in (12, 24, 48, 96)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_jw_xy_structure():
    m = jw_map(build_xy(3, 0.0))
    assert not np.any(m.pairing)
    off = np.abs(m.hopping) > 1e-14
    assert np.array_equal(off, np.abs(np.subtract.outer(range(3), range(3))) == 1)
    m1 = jw_map(build_xy(3, 1.0))
    assert np.allclose(np.abs(m1.pairing[0, 1]), np.abs(m1.hopping[0, 1]))


def test_jw_witness_is_imaginary_next_nearest_hopping():
    m = jw_map(build_witness(5))
    assert not np.any(m.pairing)
    h = m.hopping
    assert np.allclose(h.real, 0)
    assert np.all(np.abs(np.diag(h, 2)) > 0) and np.allclose(np.diag(h, 1), 0)


def test_jw_tapered_edges():
    H, _ = build_tapered(4, 2, 0.5)
    m = jw_map(H)
    Hb = jw_map(build_xy(8, 0.5))
    assert m.hopping[0, 1] == 0 and m.pairing[0, 1] == 0
    assert m.hopping[3, 4] == pytest.approx(Hb.hopping[3, 4])
    assert m.pairing[3, 4] == pytest.approx(Hb.pairing[3, 4])


def test_jw_rejects_interacting_terms():
    op = PauliSum(3, [PauliTerm(1.0, ((1, "z"), (2, "z")))])
    with pytest.raises(MappingError, match="z"):
        jw_map(op)
    with pytest.raises(MappingError):
        jw_map(PauliSum(3, [PauliTerm(1.0, ((1, "x"), (3, "x")))]))


@pytest.mark.parametrize("N", [2, 5, 8])
@pytest.mark.parametrize("gamma", [0.0, 0.3, 0.5, 1.0])
@pytest.mark.parametrize("t", [0.0, 0.2, 0.8])
def test_bdg_vs_exact(N, gamma, t):
    H = build_xy(N, gamma)
    op = H + t * build_witness(N) if N >= 3 else H
    e = eig_dense(to_matrix(op)).eigenvalues
    qp = bdg_diagonalize(jw_map(op))
    assert abs(qp.ground_energy - e[0]) <= 1e-8
    # open chains without imposed parity: many-body gap = smallest quasiparticle energy
    assert abs(bdg_gap(qp) - (e[1] - e[0])) <= 1e-8


def test_bdg_single_mode():
    for h in (-0.7, 0.0, 1.3):
        qp = bdg_diagonalize(QuadraticFermionModel([[h]]))
        assert qp.energies[0] == pytest.approx(abs(h))
        assert qp.ground_energy == pytest.approx(min(0.0, h))
    # spin analogue: a sigma_z field maps to 1 - 2 n
    qp = bdg_diagonalize(jw_map(single(1, 1, "z", 0.4)))
    assert qp.ground_energy == pytest.approx(-0.4)


def test_bdg_particle_hole_pairs():
    m = jw_map(build_xy(7, 0.3) + 0.2 * build_witness(7))
    e = np.linalg.eigvalsh(m.bdg_matrix())
    np.testing.assert_allclose(np.sort(e), np.sort(-e), atol=1e-10)


def test_model_validation():
    with pytest.raises(PreconditionError):
        QuadraticFermionModel([[0, 1], [0, 0]])
    with pytest.raises(PreconditionError):
        QuadraticFermionModel(np.zeros((2, 2)), [[0, 1], [1, 0]])


def test_particle_hole_error(monkeypatch):
    m = jw_map(build_xy(3, 0.5))
    monkeypatch.setattr(type(m), "bdg_matrix", lambda self: np.diag([1.0, 2.0, 3.0, -1.0, -2.0, -5.0]))
    with pytest.raises(ParticleHoleError):
        bdg_diagonalize(m)


def test_spectrum_real_space_vs_momentum_gapless():
    qp = bdg_diagonalize(jw_map(build_xy(10, 0.0)))
    k = np.pi * np.arange(1, 11) / 11
    assert bdg_gap(qp) == pytest.approx(2 * np.abs(np.cos(k)).min())
    assert abs(bdg_gap(qp) / 2 - min_quasiparticle_energy_momentum(DispersionParams(10, 0.0))) < np.pi / 10


def test_gap_scaling():
    assert min_quasiparticle_energy_momentum(DispersionParams(500, 1.0)) == pytest.approx(1.0)
    gaps = [bdg_gap(bdg_diagonalize(jw_map(build_xy(N, 0.0)))) for N in (20, 40, 80)]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 0.1


def test_gapped_bulk_real_space():
    qp = bdg_diagonalize(jw_map(build_xy(200, 0.5)))
    # one Majorana edge pair at zero energy; the bulk gap is 2 Lambda_min = 2 gamma
    assert qp.n_zero_modes == 1
    assert abs(qp.energies[1] / 2 - 0.5) / 0.5 < 0.05


def test_ground_state_observables_vs_exact(rng):
    N = 6
    H = build_xy(N, 0.4) + 0.3 * build_witness(N)
    for O in (build_xy(N, 0.4), build_witness(N), single(N, 3, "z")):
        sol = eig_dense(to_matrix(H))
        g = sol.eigenvectors[:, 0]
        Om = to_matrix(O).toarray()
        st = ground_state(jw_map(H))
        ev = np.real(np.vdot(g, Om @ g))
        assert st.expectation(jw_map(O)) == pytest.approx(ev, abs=1e-10)
        assert st.variance(jw_map(O)) == pytest.approx(np.real(np.vdot(g, Om @ Om @ g)) - ev**2, abs=1e-10)


@pytest.mark.parametrize("gamma", [0.0, 0.4])
def test_overlap_vs_exact(gamma):
    N = 6
    H = build_xy(N, gamma) + 0.3 * PauliSum(N, [PauliTerm(c, ((s, "z"),)) for s, c in zip(range(1, N + 1), [0.3, -0.2, 0.5, 0.1, -0.4, 0.2])])
    H2 = H + 0.15 * build_witness(N)
    a, b = ground_state(jw_map(H)), ground_state(jw_map(H2))
    ea, eb = eig_dense(to_matrix(H)), eig_dense(to_matrix(H2))
    ref = abs(np.vdot(ea.eigenvectors[:, 0], eb.eigenvectors[:, 0])) ** 2
    assert a.overlap(b) == pytest.approx(ref, abs=1e-10)
    # forcing the BdG representation gives the same number
    assert ground_state(jw_map(H), bdg=True).overlap(b) == pytest.approx(ref, abs=1e-10)


def test_dispersion_row_columns():
    r = dispersion_row(10, 1.0, 0.0)
    assert r["min_quasiparticle_energy"] == pytest.approx(1.0, abs=1e-12)
    assert set(r) == {"N", "gamma", "t", "E0", "expV", "expH", "min_quasiparticle_energy"}


def test_dispersion_limited_to_gamma_zero_or_t_zero():
    # with both anisotropy and witness coupling the printed dispersion misses the
    # exact bulk energy by a per-site amount that does not shrink with N
    def err(N):
        exact = bdg_diagonalize(jw_map(build_xy(N, 0.5), build_witness(N), 0.2)).ground_energy
        return (exact - ground_energy_momentum(DispersionParams(N, 0.5, 0.4))) / N

    assert err(192) > 0.01 and err(192) > 0.5 * err(48)
