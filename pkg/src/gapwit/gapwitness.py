"""Gap upper bounds from witness sweeps of ``H + t V``.

If the ground state ``g`` of ``H`` is an eigenvector of ``V`` and stays the
ground state of ``H + t V`` up to a level crossing at ``t*``, the jump of
``<H>`` at ``t*`` bounds the spectral gap of ``H`` from above.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import freefermion as ff
from .errors import PreconditionError
from .hermitian import HermitianOperator, as_operator
from .pauli import PauliSum, to_matrix
from .spectra import ground_space, spectral_range_bound

OVERLAP_TOL = 1e-10
CROSSING_OVERLAP = 0.5
RESOLUTION = 1e-8
DELTA = 1e-6
RESIDUAL_RTOL = 1e-8
# levels split by only ~delta * |V| just past a crossing; keep them apart
SWEEP_DEGENERACY_RTOL = 1e-11


def n_threads():
    """Worker count from ``GAPWIT_THREADS`` (unset: all CPUs)."""
    raw = os.environ.get("GAPWIT_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise PreconditionError(f"GAPWIT_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# backends: ground state of H + tV, <H> on it, overlaps between ground states


@dataclass
class _ExactState:
    vectors: np.ndarray
    energy: float
    expH: float

    @property
    def degeneracy(self):
        return self.vectors.shape[1]

    def overlap(self, other):
        # squared cosine of the largest principal angle; 0 if dimensions differ
        if self.vectors.shape[1] != other.vectors.shape[1]:
            return 0.0
        s = np.linalg.svd(self.vectors.conj().T @ other.vectors, compute_uv=False)
        return float(min(s.min(), 1.0) ** 2)


class ExactBackend:
    name = "exact"

    def __init__(self, H, V, degeneracy_tol=None, seed=0, t_max=1.0):
        self.H = as_operator(H)
        self.V = as_operator(V)
        if self.H.dimension != self.V.dimension:
            raise PreconditionError("H and V have different dimensions")
        self.seed = seed
        self.scale_H = spectral_range_bound(self.H)
        self.scale_V = spectral_range_bound(self.V)
        if degeneracy_tol is None:
            degeneracy_tol = SWEEP_DEGENERACY_RTOL * (self.scale_H + abs(t_max) * self.scale_V)
        self.degeneracy_tol = degeneracy_tol

    def state(self, t):
        op = self.H + float(t) * self.V if t else self.H
        vals, Q, _ = ground_space(op, self.degeneracy_tol, seed=self.seed)
        HQ = self.H.matrix @ Q
        expH = float(np.real(np.vdot(Q, HQ))) / Q.shape[1]
        return _ExactState(Q, float(vals[0]), expH)

    def v_residual(self, s):
        Q = s.vectors
        VQ = self.V.matrix @ Q
        return float(np.linalg.norm(VQ - Q @ (Q.conj().T @ VQ)))


class _FermionState:
    def __init__(self, gs, expH):
        self.gs = gs
        self.energy = gs.energy
        self.expH = expH
        self.degeneracy = 2 ** gs.n_zero_modes

    def overlap(self, other):
        return self.gs.overlap(other.gs)


class FermionBackend:
    name = "fermion"

    def __init__(self, H, V, zero_tol=ff.ZERO_MODE_TOL):
        if not isinstance(H, PauliSum) or not isinstance(V, PauliSum):
            raise PreconditionError("fermion backend needs PauliSum inputs")
        self.mH = ff.jw_map(H)
        self.mV = ff.jw_map(V)
        self.zero_tol = zero_tol
        self.scale_H = _model_scale(self.mH)
        self.scale_V = _model_scale(self.mV)

    def state(self, t):
        model = self.mH + self.mV.scaled(float(t)) if t else self.mH
        gs = ff.ground_state(model, self.zero_tol)
        return _FermionState(gs, gs.expectation(self.mH))

    def v_residual(self, s):
        return float(np.sqrt(max(s.gs.variance(self.mV), 0.0)))


def _model_scale(m):
    return float(np.abs(np.linalg.eigvalsh(m.bdg_matrix())).max(initial=0.0) * m.n_modes)


def make_backend(H, V, backend="auto", **kw):
    if backend == "auto":
        backend = "exact" if not isinstance(H, PauliSum) or H.n_sites <= 12 else "fermion"
    if backend == "exact":
        if isinstance(H, PauliSum):
            H = to_matrix(H)
        if isinstance(V, PauliSum):
            V = to_matrix(V)
        return ExactBackend(H, V, kw.get("degeneracy_tol"), kw.get("seed", 0), kw.get("t_max", 1.0))
    if backend == "fermion":
        return FermionBackend(H, V, kw.get("zero_tol", ff.ZERO_MODE_TOL))
    raise PreconditionError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# sweep


@dataclass
class Crossing:
    t: float
    jump: float  # <H>(t + delta) - <H>(t - delta)
    drift: float  # <H>(t - delta) - E0
    overlap: float  # overlap of the states at t -/+ delta

    def to_dict(self):
        return {"t": self.t, "jump": self.jump, "drift": self.drift, "overlap": self.overlap}


@dataclass
class GapSweepResult:
    t_grid: np.ndarray
    expH: np.ndarray
    overlap: np.ndarray
    ground_energy: np.ndarray
    E0: float
    t_star: float | None
    epsilon: float | None
    assumptions_ok: dict
    continuous: bool = False
    upper_estimate: float | None = None
    max_jump: float | None = None
    v_residual: float = 0.0
    crossings: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    backend: str = "exact"

    @property
    def has_transition(self):
        return self.t_star is not None

    @property
    def certified(self):
        return bool(self.has_transition and not self.continuous and all(self.assumptions_ok.values()))

    def max_step(self):
        """Largest change of ``<H>`` between neighbouring grid points."""
        return float(np.max(np.abs(np.diff(self.expH)))) if len(self.expH) > 1 else 0.0

    def csv_rows(self):
        for t, h, o, e in zip(self.t_grid, self.expH, self.overlap, self.ground_energy):
            yield {"t": t, "expH_minus_E0": h - self.E0, "overlap": o, "ground_energy": e}

    def summary(self):
        return {
            "t_star": self.t_star,
            "epsilon": self.epsilon,
            "assumptions_ok": dict(self.assumptions_ok),
            "certified": self.certified,
            "continuous": self.continuous,
            "upper_estimate": self.upper_estimate,
            "max_jump": self.max_jump,
            "E0": self.E0,
            "v_residual": self.v_residual,
            "crossings": [c.to_dict() for c in self.crossings],
            "warnings": list(self.warnings),
            "backend": self.backend,
        }


SWEEP_COLUMNS = ("t", "expH_minus_E0", "overlap", "ground_energy")


def sweep(
    H,
    V,
    t_max=2.0,
    n_grid=201,
    *,
    backend="auto",
    overlap_tol=OVERLAP_TOL,
    crossing_overlap=CROSSING_OVERLAP,
    resolution=RESOLUTION,
    delta=DELTA,
    residual_tol=RESIDUAL_RTOL,
    degeneracy_tol=None,
    seed=0,
    threads=None,
):
    """Sweep the ground state of ``H + t V`` over ``[0, t_max]``.

    Level crossings are intervals where consecutive ground states overlap by
    less than ``crossing_overlap``; each is bisected down to
    ``resolution * t_max`` and its ``<H>`` jump measured at ``t_c -/+ delta * t_max``.
    The witness transition ``t*`` is the first crossing whose jump is at
    least the drift ``<H> - E0`` accumulated before it; when the ground state
    is exactly constant below ``t*`` this is simply the first crossing.

    Parameters
    ----------
    H, V : HermitianOperator or PauliSum
        PauliSums are required for ``backend="fermion"``.
    t_max : float
    n_grid : int
        Number of grid points, at least 8.
    backend : {"auto", "exact", "fermion"}

    Returns
    -------
    GapSweepResult
    """
    if not t_max > 0:
        raise PreconditionError(f"t_max must be positive, got {t_max}")
    if n_grid < 8:
        raise PreconditionError(f"n_grid must be >= 8, got {n_grid}")
    bk = make_backend(H, V, backend, degeneracy_tol=degeneracy_tol, seed=seed, t_max=t_max)
    ts = np.linspace(0.0, float(t_max), int(n_grid))
    workers = threads or n_threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            states = list(pool.map(bk.state, ts))
    else:
        states = [bk.state(t) for t in ts]
    s0 = states[0]
    E0 = s0.expH
    expH = np.array([s.expH for s in states])
    ov0 = np.array([s0.overlap(s) for s in states])
    energies = np.array([s.energy for s in states])
    warnings = []
    if s0.degeneracy > 1:
        warnings.append(f"degenerate ground state at t=0 (dimension {s0.degeneracy})")

    res_t = resolution * t_max
    dt = delta * t_max
    crossings = []
    smooth = []
    for i in range(1, len(ts)):
        if states[i - 1].overlap(states[i]) >= crossing_overlap:
            continue
        a, b, sa, sb = ts[i - 1], ts[i], states[i - 1], states[i]
        found = True
        while b - a > res_t:
            mid = 0.5 * (a + b)
            sm = bk.state(mid)
            if sa.overlap(sm) < crossing_overlap:
                b, sb = mid, sm
            elif sm.overlap(sb) < crossing_overlap:
                a, sa = mid, sm
            else:
                found = False
                break
        if not found:
            smooth.append((a, b))
            continue
        tc = 0.5 * (a + b)
        if crossings and tc - crossings[-1].t <= 2 * dt:
            continue
        lo, hi = bk.state(max(tc - dt, 0.0)), bk.state(tc + dt)
        crossings.append(Crossing(float(tc), hi.expH - lo.expH, lo.expH - E0, lo.overlap(hi)))

    scale = max(bk.scale_H, np.finfo(float).tiny)
    t_star = epsilon = upper = max_jump = None
    continuous = bool(smooth)
    if crossings:
        pick = next((c for c in crossings if c.jump >= c.drift - 1e-12 * scale), crossings[0])
        t_star, epsilon = pick.t, max(pick.jump, 0.0)
        upper = pick.drift + pick.jump
        max_jump = max(c.jump for c in crossings if c.t <= t_star)
        if pick is not crossings[0]:
            warnings.append(f"{crossings.index(pick)} earlier crossing(s) smaller than the accumulated drift")
    elif np.any(ov0 < 1 - overlap_tol):
        # ground state moved without a resolvable level crossing
        continuous = True
        i = int(np.argmax(ov0 < 1 - overlap_tol))
        t_star = float(ts[i])
        upper = float(np.max(np.abs(expH[: i + 1] - E0)) + np.max(np.abs(np.diff(expH))))
        epsilon = upper
        warnings.append("continuous transition: no level crossing resolved; epsilon is an upper estimate")
    if smooth:
        warnings.append(f"{len(smooth)} avoided crossing(s) wider than the bisection resolution")

    if t_star is None:
        constant = bool(np.all(ov0 >= 1 - overlap_tol))
    else:
        constant = bool(np.all(ov0[ts < t_star - dt] >= 1 - overlap_tol))
    v_res = bk.v_residual(s0)
    eig_v = v_res <= residual_tol * max(bk.scale_V, 1.0)
    return GapSweepResult(
        t_grid=ts,
        expH=expH,
        overlap=ov0,
        ground_energy=energies,
        E0=E0,
        t_star=t_star,
        epsilon=epsilon,
        assumptions_ok={"ground_constant_on_interval": constant, "eigenvector_of_V": bool(eig_v)},
        continuous=continuous,
        upper_estimate=upper,
        max_jump=max_jump,
        v_residual=v_res,
        crossings=crossings,
        warnings=warnings,
        backend=bk.name,
    )


def gap_upper_bound(result):
    """Certified bound report ``{epsilon, valid, reason}``."""
    if result.t_star is None:
        return {"epsilon": None, "valid": False, "reason": "no_transition"}
    for name in ("ground_constant_on_interval", "eigenvector_of_V"):
        if not result.assumptions_ok.get(name, False):
            return {"epsilon": result.epsilon, "valid": False, "reason": name}
    if result.continuous:
        return {"epsilon": result.epsilon, "valid": False, "reason": "continuous_transition"}
    return {"epsilon": result.epsilon, "valid": True, "reason": None}


# ---------------------------------------------------------------------------
# witness generators


def _shifted_dense(H):
    H = as_operator(H)
    vals, _, _ = ground_space(H)
    return H.toarray() - vals[0] * np.eye(H.dimension)


def make_trivial_witness(H):
    """``H0^2 - H0`` with ``H0 = H - E0``; annihilates every ground vector."""
    H0 = _shifted_dense(H)
    return HermitianOperator(_sym(H0 @ H0 - H0), check=False)


def sample_goe(d, seed=0):
    """GOE sample ``(G + G^T) / 2`` with standard normal ``G``."""
    if d < 1:
        raise PreconditionError(f"d must be >= 1, got {d}")
    G = np.random.default_rng(seed).standard_normal((d, d))
    return HermitianOperator(0.5 * (G + G.T), check=False)


def make_random_witness(H, seed=0):
    """``H0 Z H0`` with ``Z`` from :func:`sample_goe`."""
    H0 = _shifted_dense(H)
    Z = sample_goe(H0.shape[0], seed).toarray()
    return HermitianOperator(_sym(H0 @ Z @ H0), check=False)


def _sym(m):
    return 0.5 * (m + m.conj().T)


@dataclass
class WitnessSpec:
    kind: str  # "explicit" | "trivial_h2_minus_h" | "random_hzh"
    seed: int | None = None
    operator: object = None

    KINDS = ("explicit", "trivial_h2_minus_h", "random_hzh")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise PreconditionError(f"unknown witness kind {self.kind!r}")
        if self.kind == "explicit" and self.operator is None:
            raise PreconditionError("explicit witness needs an operator")

    def build(self, H):
        if self.kind == "explicit":
            return self.operator
        if isinstance(H, PauliSum):
            H = to_matrix(H)
        if self.kind == "trivial_h2_minus_h":
            return make_trivial_witness(H)
        return make_random_witness(H, 0 if self.seed is None else self.seed)
