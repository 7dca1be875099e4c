"""Eigensolvers: full dense decomposition and block Lanczos for the low end."""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import CapacityError, ConvergenceError, InconclusiveError, PreconditionError
from .hermitian import HermitianOperator, as_operator

DENSE_CAP = 4096
DEGENERACY_RTOL = 1e-8
RESIDUAL_RTOL = 1e-10


@dataclass
class EigenSolution:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    residuals: np.ndarray
    iterations: int = 0

    def __len__(self):
        return len(self.eigenvalues)


@dataclass
class GapReport:
    ground_energy: float
    ground_degeneracy: int
    first_excited_energy: float
    gap: float
    degeneracy_tol: float
    levels: list = field(default_factory=list)

    def to_dict(self):
        return {
            "ground_energy": self.ground_energy,
            "ground_degeneracy": self.ground_degeneracy,
            "first_excited_energy": self.first_excited_energy,
            "gap": self.gap,
            "degeneracy_tol": self.degeneracy_tol,
        }


def spectral_range_bound(H):
    """Gershgorin bound on ``lambda_max - lambda_min``.

    Shift invariant and positively homogeneous, so tolerances derived from it
    behave well under ``H -> a H + c``.
    """
    m = H.matrix
    if sp.issparse(m):
        d = np.real(m.diagonal())
        r = np.asarray(abs(m).sum(axis=1)).ravel() - np.abs(d)
    else:
        d = np.real(np.diag(m))
        r = np.abs(m).sum(axis=1) - np.abs(d)
    return float(np.max(d + r) - np.min(d - r)) if len(d) else 0.0


def _residuals(H, vals, vecs):
    hv = H.matrix @ vecs
    return np.linalg.norm(hv - vecs * vals, axis=0)


def eig_dense(H, cap=DENSE_CAP):
    """Full spectrum and eigenbasis, eigenvalues ascending."""
    H = as_operator(H)
    if H.dimension > cap:
        raise CapacityError(f"dimension {H.dimension} exceeds the dense cap {cap}")
    m = H.toarray()
    if not np.any(m.imag):
        m = m.real
    vals, vecs = np.linalg.eigh(m)
    return EigenSolution(vals, vecs, _residuals(H, vals, vecs))


def _orthonormalize(W, Q, drop):
    """Orthogonalize columns of W against Q (twice) and among themselves."""
    for _ in range(2):
        if Q is not None and Q.shape[1]:
            W = W - Q @ (Q.conj().T @ W)
    norms0 = np.linalg.norm(W, axis=0)
    q, r = np.linalg.qr(W)
    keep = np.abs(np.diag(r)) > drop * np.maximum(norms0.max(initial=0.0), 1e-300)
    q = q[:, keep]
    if Q is not None and Q.shape[1] and q.shape[1]:
        q = q - Q @ (Q.conj().T @ q)
        q, _ = np.linalg.qr(q)
    return q


def eig_lowest(H, k, *, tol=None, seed=0, block=None, max_basis=None, max_restarts=300):
    """Lowest ``k`` eigenpairs by restarted block Lanczos.

    Uses full reorthogonalization of the retained basis and a thick restart
    that keeps the best Ritz vectors. The default block size ``k + 1`` lets
    the solver resolve a degenerate ground space.
    """
    H = as_operator(H)
    n = H.dimension
    if k < 1 or k > n:
        raise PreconditionError(f"need 1 <= k <= dimension, got k={k}, dimension={n}")
    A = H.matrix
    real = not np.any((A.data if H.is_sparse else A).imag)
    if real:
        A = A.real
    b = min(max(block or k + 1, k), n)
    m_max = min(n, max_basis or max(6 * b, 48))
    keep = min(max(b, m_max // 3), m_max - 1) if m_max > b else b
    scale = max(spectral_range_bound(H), np.finfo(float).tiny)
    tol_abs = (RESIDUAL_RTOL if tol is None else tol) * scale
    rng = np.random.default_rng(seed)

    def random_block(size, Q):
        w = rng.standard_normal((n, size))
        if not real:
            w = w + 1j * rng.standard_normal((n, size))
        return _orthonormalize(w, Q, 1e-10)

    Q = random_block(b, None)
    AQ = A @ Q
    last = Q
    best = np.inf
    for it in range(1, max_restarts + 1):
        while Q.shape[1] < m_max:
            room = m_max - Q.shape[1]
            W = _orthonormalize(A @ last, Q, 1e-12)[:, :room]
            if W.shape[1] == 0:
                # invariant subspace: continue from fresh directions
                W = random_block(min(b, room), Q)
                if W.shape[1] == 0:
                    break
            Q = np.hstack([Q, W])
            AQ = np.hstack([AQ, A @ W])
            last = W
        T = Q.conj().T @ AQ
        theta, Y = np.linalg.eigh(0.5 * (T + T.conj().T))
        p = min(max(keep, k), len(theta))
        U = Q @ Y[:, :p]
        AU = AQ @ Y[:, :p]
        R = AU - U * theta[:p]
        res = np.linalg.norm(R, axis=0)
        best = min(best, float(res[:k].max()))
        if res[:k].max() <= tol_abs or Q.shape[1] >= n:
            vecs = U[:, :k]
            return EigenSolution(theta[:k].copy(), vecs, _residuals(H, theta[:k], vecs), it)
        # thick restart: keep Ritz vectors, expand from the leading residuals
        Q, AQ = U, AU
        last = _orthonormalize(R[:, :b], Q, 1e-12)
        if last.shape[1] == 0:
            last = random_block(b, Q)
        Q = np.hstack([Q, last])
        AQ = np.hstack([AQ, A @ last])
    raise ConvergenceError(
        f"block Lanczos did not converge in {max_restarts} restarts", best_residual=best
    )


def _levels(H, method, k, seed):
    if method == "dense":
        sol = eig_dense(H)
        return sol.eigenvalues, sol.eigenvectors
    sol = eig_lowest(H, k, seed=seed)
    return sol.eigenvalues, sol.eigenvectors


def _pick_method(H, method):
    if method != "auto":
        return method
    return "dense" if H.dimension <= 512 or not H.is_sparse and H.dimension <= DENSE_CAP else "lanczos"


def ground_space(H, degeneracy_tol=None, *, method="auto", seed=0, k_start=2):
    """Ground energy, degenerate ground vectors, and the computed low levels.

    Returns ``(energies, vectors, degeneracy_tol)`` where ``energies`` holds
    every computed level and ``vectors`` only the ground manifold.
    """
    H = as_operator(H)
    if degeneracy_tol is None:
        degeneracy_tol = DEGENERACY_RTOL * spectral_range_bound(H)
    method = _pick_method(H, method)
    k = min(k_start, H.dimension)
    while True:
        vals, vecs = _levels(H, method, k, seed)
        g = int(np.sum(vals - vals[0] <= degeneracy_tol))
        if g < len(vals) or len(vals) == H.dimension:
            return vals, vecs[:, :g], degeneracy_tol
        k = min(2 * k, H.dimension)


def gap_report(H, degeneracy_tol=None, *, method="auto", seed=0, k_max=256):
    """Ground energy, its degeneracy, and the gap to the next distinct level."""
    H = as_operator(H)
    if degeneracy_tol is None:
        degeneracy_tol = DEGENERACY_RTOL * spectral_range_bound(H)
    method = _pick_method(H, method)
    k = min(2, H.dimension)
    while True:
        vals, _ = _levels(H, method, k, seed)
        above = np.nonzero(vals - vals[0] > degeneracy_tol)[0]
        if len(above):
            j = above[0]
            return GapReport(
                ground_energy=float(vals[0]),
                ground_degeneracy=int(j),
                first_excited_energy=float(vals[j]),
                gap=float(vals[j] - vals[0]),
                degeneracy_tol=float(degeneracy_tol),
                levels=[float(v) for v in vals],
            )
        if len(vals) == H.dimension or k >= k_max:
            raise InconclusiveError(
                f"all {len(vals)} computed levels are degenerate with the ground level; raise k"
            )
        k = min(2 * k, H.dimension, k_max)
