"""Free-fermion oracle for XY-type chains.

Spin strings ``a_i Z...Z b_j`` (a, b in {x, y}) and single ``z`` factors
are mapped by Jordan-Wigner to quadratic fermion forms

    H = sum_ij h_ij c_i^dag c_j + 1/2 sum_ij (D_ij c_i^dag c_j^dag + h.c.) + const,

which are diagonalized either in real space (BdG, exact for open chains)
or through the translation-invariant dispersion.
"""
from dataclasses import dataclass

import numpy as np

from .errors import MappingError, ParticleHoleError, PreconditionError
from .pauli import PauliSum

SYMMETRY_TOL = 1e-12
PH_TOL = 1e-9
ZERO_MODE_TOL = 1e-9

# Majorana factors M_x = c + c^dag, M_y = i(c^dag - c), stored as
# (coefficient of c^dag, coefficient of c).
_MAJORANA = {"x": (1.0, 1.0), "y": (1j, -1j)}


# ---------------------------------------------------------------------------
# translation-invariant dispersion


@dataclass(frozen=True)
class DispersionParams:
    N: int
    gamma: float
    t: float = 0.0

    def __post_init__(self):
        if int(self.N) < 2:
            raise PreconditionError(f"N must be >= 2, got {self.N}")


def momentum_grid(N):
    """Momenta ``(2j - N + 1) pi / N``: odd multiples of pi/N, symmetric about 0."""
    if N < 2:
        raise PreconditionError(f"N must be >= 2, got {N}")
    return np.pi * (2 * np.arange(N) - N + 1) / N


def quasiparticle_energy(k, gamma, t=0.0):
    """Dispersion ``sqrt((cos k + t sin 2k)^2 + gamma^2 sin^2 k)``."""
    k = np.asarray(k, dtype=float)
    return np.hypot(np.cos(k) + t * np.sin(2 * k), gamma * np.sin(k))


def ground_energy_momentum(params):
    """Bulk ground energy ``-sum_k Lambda(k)`` (no boundary term)."""
    k = momentum_grid(params.N)
    return float(-np.sum(quasiparticle_energy(k, params.gamma, params.t)))


def _dlambda_dt(k, gamma, t):
    a = np.cos(k) + t * np.sin(2 * k)
    lam = np.hypot(a, gamma * np.sin(k))
    out = np.zeros_like(k)
    pos = lam > 0
    out[pos] = a[pos] * np.sin(2 * k[pos]) / lam[pos]
    # at Lambda = 0 take |sin 2k| sign(a) with sign(0) = 0, i.e. zero
    return out


def hf_expectations(params):
    """``(<V>, <H>)`` from Hellmann-Feynman: ``dE0/dt`` and ``E0 - t dE0/dt``."""
    k = momentum_grid(params.N)
    dE = float(-np.sum(_dlambda_dt(k, params.gamma, params.t)))
    E0 = ground_energy_momentum(params)
    return dE, E0 - params.t * dE


def min_quasiparticle_energy_momentum(params):
    return float(np.min(quasiparticle_energy(momentum_grid(params.N), params.gamma, params.t)))


# ---------------------------------------------------------------------------
# real-space quadratic models


class QuadraticFermionModel:
    """Hermitian hopping, antisymmetric pairing and a constant offset."""

    def __init__(self, hopping, pairing=None, constant=0.0):
        h = np.array(hopping, dtype=complex)
        n = h.shape[0]
        if h.shape != (n, n):
            raise PreconditionError("hopping must be square")
        d = np.zeros((n, n), complex) if pairing is None else np.array(pairing, dtype=complex)
        if d.shape != (n, n):
            raise PreconditionError("pairing must match hopping")
        scale = max(np.abs(h).max(initial=0.0), np.abs(d).max(initial=0.0), 1.0)
        if np.abs(h - h.conj().T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise PreconditionError("hopping is not Hermitian")
        if np.abs(d + d.T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise PreconditionError("pairing is not antisymmetric")
        self.hopping = 0.5 * (h + h.conj().T)
        self.pairing = 0.5 * (d - d.T)
        self.constant = float(np.real(constant))
        self.n_modes = n

    @property
    def number_conserving(self):
        return not np.any(self.pairing)

    def bdg_matrix(self):
        h, d = self.hopping, self.pairing
        return np.block([[h, d], [d.conj().T, -h.T]])

    def __add__(self, other):
        return QuadraticFermionModel(
            self.hopping + other.hopping, self.pairing + other.pairing, self.constant + other.constant
        )

    def scaled(self, s):
        return QuadraticFermionModel(s * self.hopping, s * self.pairing, s * self.constant)

    def __repr__(self):
        return f"QuadraticFermionModel(n_modes={self.n_modes}, pairing={'no' if self.number_conserving else 'yes'})"


@dataclass
class QuasiparticleSpectrum:
    energies: np.ndarray  # ascending, nonnegative
    ground_energy: float
    n_zero_modes: int = 0


def _string_pair(term):
    """Decompose ``a_i Z..Z b_j`` into (i, a, j, b), or None."""
    f = term.factors
    if len(f) < 2:
        return None
    (i, a), (j, b) = f[0], f[-1]
    if a == "z" or b == "z":
        return None
    middle = f[1:-1]
    if len(middle) != j - i - 1 or any(ax != "z" for _, ax in middle):
        return None
    return i, a, j, b


def jw_map(H_terms, V_terms=None, t=0.0):
    """Quadratic fermion model of ``H + t V``.

    Site ``s`` (1-based) becomes mode ``s - 1``. Raises :class:`MappingError`
    naming the first term that is not a fermion bilinear.
    """
    op = H_terms if V_terms is None else H_terms + float(t) * V_terms
    if V_terms is not None and V_terms.n_sites != H_terms.n_sites:
        raise PreconditionError("H and V act on different chains")
    n = op.n_sites
    h = np.zeros((n, n), complex)
    d = np.zeros((n, n), complex)
    dcc = np.zeros((n, n), complex)
    const = 0.0 + 0.0j
    for term in op.terms:
        c = term.coefficient
        f = term.factors
        if not f:
            const += c
            continue
        if len(f) == 1 and f[0][1] == "z":
            s = f[0][0] - 1
            const += c
            h[s, s] += -2 * c
            continue
        pair = _string_pair(term)
        if pair is None:
            raise MappingError(f"term {term} is not quadratic under Jordan-Wigner")
        i, a, j, b = pair
        # a_i Z..Z b_j = -i M_y(i) M_b(j) for a = x,  +i M_x(i) M_b(j) for a = y
        if a == "x":
            cc, p = -1j * c, "y"
        else:
            cc, p = 1j * c, "x"
        ap, bp = _MAJORANA[p]
        aq, bq = _MAJORANA[b]
        i, j = i - 1, j - 1
        h[i, j] += cc * ap * bq
        h[j, i] += -cc * bp * aq
        d[i, j] += cc * ap * aq
        d[j, i] -= cc * ap * aq
        dcc[j, i] += np.conj(cc * bp * bq)
        dcc[i, j] -= np.conj(cc * bp * bq)
    if np.abs(d - dcc).max(initial=0.0) > 1e-12 * max(1.0, np.abs(d).max(initial=0.0)):
        raise MappingError("pairing terms are not Hermitian-conjugate pairs")
    if abs(const.imag) > 1e-12:
        raise MappingError("imaginary constant term")
    return QuadraticFermionModel(h, d, const.real)


# ---------------------------------------------------------------------------
# diagonalization


def _check_ph(e, tol=PH_TOL):
    scale = max(1.0, np.abs(e).max(initial=0.0))
    if np.abs(e + e[::-1]).max(initial=0.0) > tol * scale:
        raise ParticleHoleError("BdG spectrum is not symmetric under e -> -e")


def bdg_diagonalize(model, zero_tol=ZERO_MODE_TOL):
    """Quasiparticle energies and ground energy ``const + tr(h)/2 - sum(eps)/2``."""
    e = np.linalg.eigvalsh(model.bdg_matrix())
    _check_ph(e)
    n = model.n_modes
    eps = np.sort(np.abs(0.5 * (e[n:] - e[:n][::-1])))
    E0 = model.constant + 0.5 * float(np.real(np.trace(model.hopping))) - 0.5 * float(eps.sum())
    return QuasiparticleSpectrum(eps, E0, int(np.sum(eps <= zero_tol)))


def bdg_gap(spectrum):
    """Smallest quasiparticle energy.

    For open chains without imposed parity this is the many-body gap
    ``E1 - E0`` (checked against exact diagonalization in the tests).
    """
    return float(spectrum.energies[0])


class GaussianGroundState:
    """Ground state of a quadratic model, with observable evaluation.

    Zero modes (``|e| <= zero_tol``) make the ground manifold degenerate;
    they enter the correlation matrix half filled, and are ignored by
    :meth:`overlap`.
    """

    def __init__(self, model, zero_tol=ZERO_MODE_TOL, *, bdg=False):
        self.model = model
        self.zero_tol = zero_tol
        self.n_modes = model.n_modes
        self.number_conserving = model.number_conserving and not bdg
        if self.number_conserving:
            e, U = np.linalg.eigh(model.hopping)
            occ, zero = e < -zero_tol, np.abs(e) <= zero_tol
            self.energy = model.constant + float(e[occ].sum())
        else:
            M = model.bdg_matrix()
            e, U = np.linalg.eigh(M)
            _check_ph(e)
            occ, zero = e > zero_tol, np.abs(e) <= zero_tol
            self.energy = (
                model.constant
                + 0.5 * float(np.real(np.trace(model.hopping)))
                - 0.5 * float(e[occ].sum())
            )
        self.modes = U[:, occ]
        self.n_zero_modes = int(zero.sum()) if self.number_conserving else int(zero.sum()) // 2
        Z = U[:, zero]
        self.correlation = self.modes @ self.modes.conj().T + 0.5 * (Z @ Z.conj().T)

    def expectation(self, model):
        """``<O>`` for a quadratic observable given as a model."""
        G = self.correlation
        if self.number_conserving:
            return float(np.real(np.sum(model.hopping * G.T))) + model.constant
        if not np.any(model.pairing):
            n = self.n_modes
            Gh = G[:n, :n]
            val = np.sum(model.hopping * Gh.T) - np.sum(model.hopping.T * G[n:, n:].T)
            val = -0.5 * val + 0.5 * np.trace(model.hopping)
            return float(np.real(val)) + model.constant
        M = model.bdg_matrix()
        return float(np.real(-0.5 * np.sum(M * G.T) + 0.5 * np.trace(model.hopping))) + model.constant

    def variance(self, model):
        """Variance of a quadratic observable (exact for a pure Gaussian state)."""
        G = self.correlation
        if self.number_conserving:
            if np.any(model.pairing):
                raise PreconditionError("pairing observable on a number-conserving state")
            h = model.hopping
            return float(np.real(np.trace(h @ (np.eye(self.n_modes) - G) @ h @ G)))
        M = model.bdg_matrix()
        R = (np.eye(len(G)) - G) @ M @ G
        return 0.5 * float(np.linalg.norm(R) ** 2)

    def overlap(self, other):
        """Squared overlap ``|<a|b>|^2`` of two ground states (nondegenerate modes)."""
        if self.number_conserving != other.number_conserving:
            a = GaussianGroundState(self.model, self.zero_tol, bdg=True)
            b = GaussianGroundState(other.model, other.zero_tol, bdg=True)
            return a.overlap(b)
        if self.modes.shape != other.modes.shape:
            return 0.0
        det = abs(np.linalg.det(self.modes.conj().T @ other.modes))
        return float(det**2 if self.number_conserving else det)


def ground_state(model, zero_tol=ZERO_MODE_TOL, *, bdg=False):
    return GaussianGroundState(model, zero_tol, bdg=bdg)


SCAN_COLUMNS = ("N", "gamma", "t", "E0", "expV", "expH", "min_quasiparticle_energy")


def dispersion_row(N, gamma, t):
    p = DispersionParams(int(N), float(gamma), float(t))
    expV, expH = hf_expectations(p)
    return {
        "N": p.N,
        "gamma": p.gamma,
        "t": p.t,
        "E0": ground_energy_momentum(p),
        "expV": expV,
        "expH": expH,
        "min_quasiparticle_energy": min_quasiparticle_energy_momentum(p),
    }
