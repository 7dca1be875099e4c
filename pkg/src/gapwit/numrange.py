"""Joint numerical range W(A, B) of two Hermitian operators.

The boundary is traced by support points: for direction ``n = (cos t, sin t)``
the minimizer of ``n . p`` over W is the image of the ground state of
``cos t A + sin t B``. A degenerate ground space gives a flat facet whose
endpoints come from the compression of ``-sin t A + cos t B``.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import CapacityError, NotACuspError, PreconditionError, ResolutionError
from .hermitian import HermitianOperator, as_operator
from .spectra import DEGENERACY_RTOL, DENSE_CAP, ground_space, spectral_range_bound

TWO_PI = 2 * np.pi
CHORD_RTOL = 1e-2
MAX_DEPTH = 20
HULL_RTOL = 1e-6
EIGVEC_TOL = 1e-6


@dataclass
class BoundarySample:
    theta: float
    point: tuple
    ground_energy: float
    degenerate: bool = False
    segment: tuple | None = None  # (entry, exit) endpoints when degenerate

    @property
    def entry(self):
        return self.segment[0] if self.degenerate else self.point

    @property
    def exit(self):
        return self.segment[1] if self.degenerate else self.point


@dataclass
class Boundary:
    samples: list
    closed: bool = True
    n_angles: int = 0
    scale: float = 1.0
    A: HermitianOperator | None = field(default=None, repr=False)
    B: HermitianOperator | None = field(default=None, repr=False)
    degeneracy_tol: float | None = None

    def __len__(self):
        return len(self.samples)

    def thetas(self):
        return np.array([s.theta for s in self.samples])

    def points(self):
        return np.array([s.point for s in self.samples])

    def polygon(self, merge_tol=1e-12):
        """Boundary vertices in order, facet endpoints included, duplicates merged."""
        pts = []
        for s in self.samples:
            cand = [s.entry, s.exit] if s.degenerate else [s.point]
            for p in cand:
                if not pts or np.hypot(p[0] - pts[-1][0], p[1] - pts[-1][1]) > merge_tol * self.scale:
                    pts.append(p)
        if len(pts) > 1 and np.hypot(pts[0][0] - pts[-1][0], pts[0][1] - pts[-1][1]) <= merge_tol * self.scale:
            pts.pop()
        return np.array(pts)

    def convexity_defect(self):
        """Most negative turn (cross product) along the polygon, scaled by ``scale^2``."""
        P = self.polygon()
        if len(P) < 3:
            return 0.0
        a = np.roll(P, 1, axis=0) - P
        b = np.roll(P, -1, axis=0) - P
        cross = (b[:, 0] * a[:, 1] - b[:, 1] * a[:, 0]) / self.scale**2
        return float(min(cross.min(), 0.0))

    def is_convex(self, tol=1e-9):
        return self.convexity_defect() >= -tol

    def csv_rows(self):
        for s in self.samples:
            (ax, ay), (bx, by) = s.segment if s.degenerate else ((np.nan, np.nan), (np.nan, np.nan))
            yield {
                "theta": s.theta,
                "expA": s.point[0],
                "expB": s.point[1],
                "ground_energy": s.ground_energy,
                "degenerate": int(s.degenerate),
                "seg_ax": ax,
                "seg_ay": ay,
                "seg_bx": bx,
                "seg_by": by,
            }


BOUNDARY_COLUMNS = ("theta", "expA", "expB", "ground_energy", "degenerate", "seg_ax", "seg_ay", "seg_bx", "seg_by")


@dataclass
class Cusp:
    point: tuple
    normal_cone: tuple
    preimage: np.ndarray = field(repr=False)
    facet_count: int

    @property
    def width(self):
        return self.normal_cone[1] - self.normal_cone[0]


def _pair(A, B):
    A, B = as_operator(A), as_operator(B)
    if A.dimension != B.dimension:
        raise PreconditionError(f"A and B differ in dimension: {A.dimension} vs {B.dimension}")
    return A, B


def _expect(op, Q):
    return float(np.real(np.vdot(Q, op.matrix @ Q)))


def _pair_tol(A, B):
    # relative to the pair: a combination can be nearly scalar even when A, B are not
    return DEGENERACY_RTOL * max(spectral_range_bound(A), spectral_range_bound(B), np.finfo(float).tiny)


def _support(A, B, theta, degeneracy_tol=None, seed=0):
    if degeneracy_tol is None:
        degeneracy_tol = _pair_tol(A, B)
    c, s = np.cos(theta), np.sin(theta)
    vals, Q, _ = ground_space(c * A + s * B, degeneracy_tol, seed=seed)
    return vals[0], Q


def support_point(A, B, theta, degeneracy_tol=None, *, seed=0):
    """Support point of W(A, B) for direction ``theta`` (ground state image)."""
    A, B = _pair(A, B)
    theta = float(np.mod(theta, TWO_PI))
    e0, Q = _support(A, B, theta, degeneracy_tol, seed)
    g = Q.shape[1]
    if g == 1:
        q = Q[:, 0]
        return BoundarySample(theta, (_expect(A, q), _expect(B, q)), float(e0))
    c, s = np.cos(theta), np.sin(theta)
    QA = Q.conj().T @ (A.matrix @ Q)
    QB = Q.conj().T @ (B.matrix @ Q)
    _, U = np.linalg.eigh(-s * QA + c * QB)
    ends = []
    for j in (-1, 0):  # entry (largest tangential coordinate), then exit
        u = U[:, j]
        ends.append((float(np.real(u.conj() @ QA @ u)), float(np.real(u.conj() @ QB @ u))))
    centroid = (float(np.real(np.trace(QA))) / g, float(np.real(np.trace(QB))) / g)
    return BoundarySample(theta, centroid, float(e0), True, tuple(ends))


def _chord_angle(p, q, lo, hi):
    """Normal direction of the chord p -> q lying in (lo, hi), or None."""
    dx, dy = q[0] - p[0], q[1] - p[1]
    # minimizing direction of a counterclockwise chord points to its right
    ang = np.mod(np.arctan2(-dx, dy), TWO_PI)
    for cand in (ang, ang + TWO_PI, ang - TWO_PI):
        if lo < cand < hi:
            return cand
    return None


def sample_boundary(A, B, n_angles=360, adaptive=True, *, degeneracy_tol=None, chord_rtol=CHORD_RTOL,
                    max_depth=MAX_DEPTH, seed=0, threads=1):
    """Support points on the uniform angle grid, optionally refined.

    Refinement splits an angular interval whose chord exceeds
    ``chord_rtol * scale`` at the chord's normal direction (bisection as
    fallback) until a facet is confirmed or ``max_depth`` is reached.
    """
    if n_angles < 3:
        raise PreconditionError(f"n_angles must be >= 3, got {n_angles}")
    A, B = _pair(A, B)
    scale = max(spectral_range_bound(A), spectral_range_bound(B), np.finfo(float).tiny)
    if degeneracy_tol is None:
        degeneracy_tol = DEGENERACY_RTOL * scale
    thetas = TWO_PI * np.arange(n_angles) / n_angles

    def sp(t):
        return support_point(A, B, t, degeneracy_tol, seed=seed)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            base = list(pool.map(sp, thetas))
    else:
        base = [sp(t) for t in thetas]

    samples = list(base)
    if adaptive:
        tol = chord_rtol * scale
        extra = []
        for i in range(n_angles):
            a = base[i]
            b = base[(i + 1) % n_angles]
            hi = b.theta if i + 1 < n_angles else b.theta + TWO_PI
            _refine(sp, a, b, a.theta, hi, tol, scale, max_depth, extra)
        samples.extend(extra)
    samples.sort(key=lambda s: s.theta)
    return Boundary(samples, True, n_angles, scale, A, B, degeneracy_tol)


def _refine(sp, a, b, lo, hi, tol, scale, depth, out):
    p, q = a.exit, b.entry
    if depth <= 0 or np.hypot(q[0] - p[0], q[1] - p[1]) <= tol:
        return
    mid = _chord_angle(p, q, lo, hi)
    if mid is None or min(mid - lo, hi - mid) < 1e-3 * (hi - lo):
        mid = 0.5 * (lo + hi)
    m = sp(mid)
    n = np.array([np.cos(mid), np.sin(mid)])
    # facet test: the chord itself is a flat piece of the boundary
    on_line = abs(n @ np.subtract(p, m.exit)) <= 1e-9 * scale and abs(n @ np.subtract(q, m.exit)) <= 1e-9 * scale
    out.append(m)
    if on_line and m.degenerate:
        return
    _refine(sp, a, m, lo, mid, tol, scale, depth - 1, out)
    _refine(sp, m, b, mid, hi, tol, scale, depth - 1, out)


def verify_common_eigenvector(A, B, state):
    """Residuals ``||X psi - <X> psi||`` for X = A, B."""
    psi = np.asarray(state, dtype=complex).ravel()
    out = []
    for X in (as_operator(A), as_operator(B)):
        xp = X.matrix @ psi
        out.append(float(np.linalg.norm(xp - np.vdot(psi, xp) * psi)))
    return tuple(out)


def detect_cusps(boundary, angle_min=None, point_tol=None, *, edge_tol=1e-10):
    """Boundary points whose support direction is stationary over an angle interval.

    Parameters
    ----------
    boundary : Boundary
        Must keep references to its operators (as produced by
        :func:`sample_boundary`).
    angle_min : float, optional
        Minimum normal-cone width; default ``3 * 2 pi / n_angles``.
    point_tol : float, optional
        Stationarity tolerance; default ``1e-8 * scale``.
    """
    n = boundary.n_angles or len(boundary)
    if angle_min is None:
        angle_min = 3 * TWO_PI / n
    if point_tol is None:
        point_tol = 1e-8 * boundary.scale
    S = boundary.samples
    th = boundary.thetas()
    gaps = np.diff(np.append(th, th[0] + TWO_PI))
    if gaps.max() > angle_min / 3 * (1 + 1e-9):
        raise ResolutionError(
            f"angular spacing {gaps.max():.3g} too coarse for angle_min {angle_min:.3g}"
        )
    A, B = boundary.A, boundary.B

    def same(s, p):
        return not s.degenerate and np.hypot(s.point[0] - p[0], s.point[1] - p[1]) <= point_tol

    m = len(S)
    # rotate so that index 0 starts a new run
    start = next((i for i in range(m) if not same(S[i], S[i - 1].point) or S[i - 1].degenerate), None)
    if start is None:
        if S[0].degenerate:
            return []
        _, Q = _support(A, B, 0.0, boundary.degeneracy_tol)
        return [Cusp(S[0].point, (0.0, TWO_PI), Q[:, 0], 0)]
    order = [(start + j) % m for j in range(m)]
    runs, cur = [], [order[0]]
    for i in order[1:]:
        if same(S[i], S[cur[0]].point) and not S[cur[0]].degenerate:
            cur.append(i)
        else:
            runs.append(cur)
            cur = [i]
    runs.append(cur)

    cusps = []
    for run in runs:
        s0 = S[run[0]]
        if s0.degenerate or len(run) < 2:
            continue
        t_first = th[run[0]]
        t_last = t_first + np.mod(th[run[-1]] - t_first, TWO_PI)
        prev_t = t_first - np.mod(t_first - th[(run[0] - 1) % m], TWO_PI)
        next_t = t_last + np.mod(th[(run[-1] + 1) % m] - t_last, TWO_PI)
        p = s0.point
        lo = _edge(A, B, p, t_first, prev_t, point_tol, edge_tol, boundary.degeneracy_tol)
        hi = _edge(A, B, p, t_last, next_t, point_tol, edge_tol, boundary.degeneracy_tol)
        if hi - lo < angle_min:
            continue
        _, Q = _support(A, B, 0.5 * (lo + hi), boundary.degeneracy_tol)
        dtol = boundary.degeneracy_tol or _pair_tol(A, B)
        facets = sum(_facet_at(A, B, t, edge_tol, boundary.scale, dtol) for t in (lo, hi))
        cusps.append(Cusp(p, (float(lo), float(hi)), Q[:, 0], facets))
    return cusps


def _edge(A, B, p, inside, outside, point_tol, edge_tol, degeneracy_tol):
    """Bisect the normal-cone edge between ``inside`` and ``outside`` angles."""
    for _ in range(60):
        if abs(outside - inside) <= edge_tol:
            break
        mid = 0.5 * (inside + outside)
        s = support_point(A, B, mid, degeneracy_tol)
        if not s.degenerate and np.hypot(s.point[0] - p[0], s.point[1] - p[1]) <= point_tol:
            inside = mid
        else:
            outside = mid
    return 0.5 * (inside + outside)


def _facet_at(A, B, theta, edge_tol, scale, degeneracy_tol):
    """Is the support direction ``theta`` degenerate (a facet) up to edge resolution?"""
    c, s = np.cos(theta), np.sin(theta)
    # bisection stops where the level splitting reaches degeneracy_tol, so allow a margin
    tol = 10 * degeneracy_tol + 100 * edge_tol * scale
    vals, Q, _ = ground_space(c * A + s * B, tol)
    if Q.shape[1] < 2:
        return 0
    # a facet needs distinct endpoints, not just a repeated image point
    QA = Q.conj().T @ (A.matrix @ Q)
    QB = Q.conj().T @ (B.matrix @ Q)
    w = np.linalg.eigvalsh(-s * QA + c * QB)
    return int(w[-1] - w[0] > 1e-6 * scale)


def hull_decomposition_check(A, B, g, *, n_angles=720, tol=None, residual_tol=EIGVEC_TOL):
    """Check W(A, B) = conv({p_g} U W(A_perp, B_perp)) for a common eigenvector g.

    Both sides are compared through their support functions: the Hausdorff
    distance of two convex sets equals ``max_t |h1(t) - h2(t)|``. The point
    sets of both sampled boundaries are compared as well, for reference.

    Returns
    -------
    dict
        ``passed``, ``support_distance``, ``hausdorff_sampled``, ``tol``,
        ``point`` and ``residuals``.
    """
    A, B = _pair(A, B)
    if A.dimension > DENSE_CAP:
        raise CapacityError(f"dimension {A.dimension} exceeds dense cap {DENSE_CAP}")
    g = np.asarray(g, dtype=complex).ravel()
    g = g / np.linalg.norm(g)
    scale = max(spectral_range_bound(A), spectral_range_bound(B), np.finfo(float).tiny)
    res = verify_common_eigenvector(A, B, g)
    if max(res) > residual_tol * max(scale, 1.0):
        raise NotACuspError(
            f"state is not a common eigenvector: residuals {res[0]:.3e}, {res[1]:.3e}"
        )
    if tol is None:
        tol = HULL_RTOL * scale
    P = sla.null_space(g.conj()[None, :])
    Ad, Bd = A.toarray(), B.toarray()
    Ap = HermitianOperator(P.conj().T @ Ad @ P, check=False)
    Bp = HermitianOperator(P.conj().T @ Bd @ P, check=False)
    pg = (float(np.real(g.conj() @ Ad @ g)), float(np.real(g.conj() @ Bd @ g)))
    thetas = TWO_PI * np.arange(n_angles) / n_angles
    dist = 0.0
    for t in thetas:
        c, s = np.cos(t), np.sin(t)
        hW = np.linalg.eigvalsh(c * Ad + s * Bd)[0]
        hc = c * pg[0] + s * pg[1]
        if P.shape[1]:
            hc = min(hc, np.linalg.eigvalsh(c * Ap.toarray() + s * Bp.toarray())[0])
        dist = max(dist, abs(hW - hc))
    n_pts = max(n_angles // 4, 16)
    full = sample_boundary(A, B, n_pts, adaptive=False).polygon()
    if P.shape[1]:
        part = np.vstack([sample_boundary(Ap, Bp, n_pts, adaptive=False).polygon(), [pg]])
    else:
        part = np.array([pg])
    haus = _hausdorff_to_hull(full, part)
    return {
        "passed": bool(dist <= tol),
        "support_distance": float(dist),
        "hausdorff_sampled": float(haus),
        "tol": float(tol),
        "point": pg,
        "residuals": res,
    }


def _hausdorff_to_hull(P, Q):
    """Symmetric Hausdorff distance between point set P and the convex hull of Q."""
    from scipy.spatial import ConvexHull, QhullError

    def hull_poly(X):
        try:
            return X[ConvexHull(X).vertices]
        except (QhullError, ValueError):
            return X

    def dist_to_poly(x, V):
        if len(V) == 1:
            return float(np.hypot(*(x - V[0])))
        best = np.inf
        for a, b in zip(V, np.roll(V, -1, axis=0)):
            d = b - a
            L = d @ d
            u = 0.0 if L == 0 else np.clip((x - a) @ d / L, 0.0, 1.0)
            best = min(best, float(np.hypot(*(x - a - u * d))))
        return best

    HP, HQ = hull_poly(P), hull_poly(Q)
    d1 = max(dist_to_poly(x, HQ) for x in HP)
    d2 = max(dist_to_poly(x, HP) for x in HQ)
    return max(d1, d2)
