"""Pauli-string algebra and the spin-chain Hamiltonians built from it.

Sites are 1-based. Site 1 is the most significant bit of a basis-state index,
so matrices agree with ``kron(op_1, op_2, ..., op_N)``.
"""
import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels
from .errors import (
    CapacityError,
    InvalidSizeError,
    NonHermitianError,
    PreconditionError,
)
from .hermitian import HermitianOperator

AXES = ("x", "y", "z")
DROP_TOL = 1e-14
MAX_SPARSE_SITES = 20
MAX_DENSE_SITES = 12

# single-site products: _MUL[(a, b)] = (phase, c) with sigma_a sigma_b = phase * sigma_c
# (c is None for the identity)
_MUL = {}
for _a in AXES:
    _MUL[(_a, _a)] = (1.0 + 0j, None)
for _a, _b, _c in (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")):
    _MUL[(_a, _b)] = (1j, _c)
    _MUL[(_b, _a)] = (-1j, _c)


@dataclass(frozen=True)
class PauliTerm:
    coefficient: complex
    factors: tuple  # ((site, axis), ...) with strictly increasing sites

    def __post_init__(self):
        sites = [s for s, _ in self.factors]
        if any(b <= a for a, b in zip(sites, sites[1:])):
            raise PreconditionError(f"sites must be strictly increasing: {sites}")
        for s, a in self.factors:
            if a not in AXES:
                raise PreconditionError(f"unknown Pauli axis {a!r}")
            if s < 1:
                raise PreconditionError(f"site indices start at 1, got {s}")
        if not np.isfinite(self.coefficient):
            raise PreconditionError("term coefficient must be finite")

    @property
    def sites(self):
        return tuple(s for s, _ in self.factors)

    def label(self):
        if not self.factors:
            return "I"
        return " ".join(f"{a}{s}" for s, a in self.factors)


class PauliSum:
    """Sum of Pauli strings on ``n_sites`` qubits with merged, nonzero terms.

    Coefficients of a Hermitian sum are real. Complex coefficients appear only
    in intermediate products (see :func:`pauli_compose`).
    """

    __slots__ = ("n_sites", "_terms")

    def __init__(self, n_sites, terms=()):
        if int(n_sites) != n_sites or n_sites < 1:
            raise InvalidSizeError(f"n_sites must be a positive integer, got {n_sites}")
        self.n_sites = int(n_sites)
        acc = {}
        for t in terms:
            if not isinstance(t, PauliTerm):
                coeff, factors = t
                t = PauliTerm(coeff, tuple((int(s), str(a)) for s, a in factors))
            if t.factors and t.factors[-1][0] > self.n_sites:
                raise PreconditionError(
                    f"term {t.label()} touches a site beyond n_sites={self.n_sites}"
                )
            acc[t.factors] = acc.get(t.factors, 0.0) + t.coefficient
        kept = []
        for factors in sorted(acc, key=lambda f: (len(f), f)):
            c = complex(acc[factors])
            if abs(c) < DROP_TOL:
                continue
            if c.imag == 0.0:
                c = c.real
            kept.append(PauliTerm(c, factors))
        self._terms = tuple(kept)

    @property
    def terms(self):
        return self._terms

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_sites == other.n_sites and self._terms == other._terms

    def __hash__(self):
        return hash((self.n_sites, self._terms))

    def __repr__(self):
        return f"PauliSum(n_sites={self.n_sites}, n_terms={len(self)})"

    @property
    def is_hermitian(self):
        return all(isinstance(t.coefficient, float) for t in self._terms)

    def coefficient(self, factors):
        """Coefficient of a factor list such as ``[(1, "x"), (2, "x")]`` (0 if absent)."""
        key = tuple((int(s), a) for s, a in factors)
        for t in self._terms:
            if t.factors == key:
                return t.coefficient
        return 0.0

    def __add__(self, other):
        return pauli_add(self, other)

    def __sub__(self, other):
        return pauli_add(self, pauli_scale(other, -1.0))

    def __mul__(self, s):
        return pauli_scale(self, s)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return pauli_compose(self, other, hermitian=False)

    # serialization
    def to_dict(self):
        if not self.is_hermitian:
            raise NonHermitianError("only real-coefficient sums are serializable")
        return {
            "n_sites": self.n_sites,
            "terms": [
                {"coeff": t.coefficient, "factors": [[s, a] for s, a in t.factors]}
                for t in self._terms
            ],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d):
        terms = []
        for t in d["terms"]:
            coeff = t["coeff"]
            if not isinstance(coeff, (int, float)):
                raise PreconditionError(f"coefficient must be a real number, got {coeff!r}")
            terms.append(PauliTerm(float(coeff), tuple((int(s), str(a)) for s, a in t["factors"])))
        return cls(int(d["n_sites"]), terms)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def single(n_sites, site, axis, coeff=1.0):
    """``coeff * sigma_axis`` on one site."""
    return PauliSum(n_sites, [PauliTerm(coeff, ((site, axis),))])


def identity(n_sites, coeff=1.0):
    return PauliSum(n_sites, [PauliTerm(coeff, ())])


def build_xy(N, gamma):
    """Open XY chain ``-sum_i [(1+g)/2 x_i x_{i+1} + (1-g)/2 y_i y_{i+1}]``."""
    if N < 2:
        raise InvalidSizeError(f"XY chain needs N >= 2, got N={N}")
    return _xy_terms(N, gamma, np.ones(N))


def build_witness(N):
    """Three-spin witness ``sum_i x_{i-1} z_i y_{i+1} - y_{i-1} z_i x_{i+1}``.

    The sum runs over every interior site ``i = 2..N-1`` (``2(N-2)`` terms).
    """
    if N < 3:
        raise InvalidSizeError(f"witness needs N >= 3, got N={N}")
    return _witness_terms(N, np.ones(N))


def taper_weight(i, N, m):
    """Raised-cosine edge weight of site ``i`` on a chain of ``N + 2m`` sites.

    Ramps from 0 at site 1 up to 1 over the first ``m`` sites, stays 1 on the
    ``N`` bulk sites ``m < i <= N + m``, and mirrors the ramp at the far end, so
    ``w(i) == w(N + 2m + 1 - i)``.
    """
    total = N + 2 * m
    if not 1 <= i <= total:
        raise IndexError(f"site {i} outside 1..{total}")
    if m == 0 or m < i <= N + m:
        return 1.0
    if i <= m:
        return 0.5 * (1.0 - math.cos(math.pi * (i - 1) / m))
    return 0.5 * (1.0 - math.cos(math.pi * (total - i) / m))


def taper_weights(N, m):
    return np.array([taper_weight(i, N, m) for i in range(1, N + 2 * m + 1)])


def build_tapered(N, m, gamma):
    """Tapered pair ``(H', V')`` on ``N + 2m`` sites.

    Spin operators carry ``w**(1/2)`` in ``H'`` and ``w**(1/3)`` in ``V'``, so a
    two-site term is weighted by ``sqrt(w_i w_{i+1})`` and a three-site term by
    ``(w_{i-1} w_i w_{i+1})**(1/3)``.
    """
    if N < 2:
        raise InvalidSizeError(f"tapered chain needs N >= 2, got N={N}")
    if m < 0:
        raise InvalidSizeError(f"taper length must be >= 0, got m={m}")
    total = N + 2 * m
    if total < 3:
        raise InvalidSizeError(f"witness needs at least 3 sites, got {total}")
    w = taper_weights(N, m)
    return _xy_terms(total, gamma, w), _witness_terms(total, w)


def _xy_terms(L, gamma, w):
    cx = -(1.0 + gamma) / 2.0
    cy = -(1.0 - gamma) / 2.0
    terms = []
    for i in range(1, L):
        s = math.sqrt(w[i - 1] * w[i])
        terms.append(PauliTerm(cx * s, ((i, "x"), (i + 1, "x"))))
        terms.append(PauliTerm(cy * s, ((i, "y"), (i + 1, "y"))))
    return PauliSum(L, terms)


def _witness_terms(L, w):
    terms = []
    for i in range(2, L):
        s = (w[i - 2] * w[i - 1] * w[i]) ** (1.0 / 3.0)
        terms.append(PauliTerm(s, ((i - 1, "x"), (i, "z"), (i + 1, "y"))))
        terms.append(PauliTerm(-s, ((i - 1, "y"), (i, "z"), (i + 1, "x"))))
    return PauliSum(L, terms)


def _check_sites(a, b):
    if a.n_sites != b.n_sites:
        raise PreconditionError(f"n_sites mismatch: {a.n_sites} vs {b.n_sites}")


def pauli_add(a, b):
    _check_sites(a, b)
    return PauliSum(a.n_sites, a.terms + b.terms)


def pauli_scale(a, s):
    return PauliSum(a.n_sites, [PauliTerm(t.coefficient * s, t.factors) for t in a.terms])


def _multiply_strings(f, g):
    phase = 1.0 + 0j
    out = []
    i = j = 0
    while i < len(f) or j < len(g):
        if j == len(g) or (i < len(f) and f[i][0] < g[j][0]):
            out.append(f[i])
            i += 1
        elif i == len(f) or g[j][0] < f[i][0]:
            out.append(g[j])
            j += 1
        else:
            p, c = _MUL[(f[i][1], g[j][1])]
            phase *= p
            if c is not None:
                out.append((f[i][0], c))
            i += 1
            j += 1
    return phase, tuple(out)


def pauli_compose(a, b, hermitian=True, rtol=1e-12):
    """Operator product ``a @ b`` simplified site by site.

    With ``hermitian=True`` the product must have real coefficients (up to
    ``rtol`` of the largest coefficient); otherwise :class:`NonHermitianError`.
    """
    _check_sites(a, b)
    terms = []
    for ta in a.terms:
        for tb in b.terms:
            phase, factors = _multiply_strings(ta.factors, tb.factors)
            terms.append(PauliTerm(phase * ta.coefficient * tb.coefficient, factors))
    out = PauliSum(a.n_sites, terms)
    if not hermitian:
        return out
    scale = max((abs(t.coefficient) for t in out.terms), default=0.0)
    worst = max((abs(complex(t.coefficient).imag) for t in out.terms), default=0.0)
    if worst > rtol * scale:
        raise NonHermitianError(
            f"product has imaginary coefficients up to {worst:.3e}; it is not Hermitian"
        )
    return PauliSum(a.n_sites, [PauliTerm(complex(t.coefficient).real, t.factors) for t in out.terms])


def string_masks(op):
    """Per-term ``(flip, sign, coeff)`` arrays for the basis-state kernels."""
    n = op.n_sites
    flips = np.zeros(len(op), dtype=np.int64)
    signs = np.zeros(len(op), dtype=np.int64)
    coeffs = np.zeros(len(op), dtype=np.complex128)
    for k, t in enumerate(op.terms):
        ny = 0
        for site, axis in t.factors:
            bit = 1 << (n - site)
            if axis in ("x", "y"):
                flips[k] |= bit
            if axis in ("y", "z"):
                signs[k] |= bit
            ny += axis == "y"
        coeffs[k] = t.coefficient * (1j ** ny)
    return flips, signs, coeffs


def sparse_matrix(op):
    """CSR realization of any PauliSum (no Hermiticity requirement)."""
    if op.n_sites > MAX_SPARSE_SITES:
        raise CapacityError(
            f"{op.n_sites} sites exceeds the sparse cap of {MAX_SPARSE_SITES}"
        )
    dim = 1 << op.n_sites
    if len(op) == 0:
        return sp.csr_matrix((dim, dim), dtype=np.complex128)
    rows, cols, data = _kernels.pauli_coo(*string_masks(op), dim)
    m = sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))
    m.sum_duplicates()
    m.eliminate_zeros()
    return m


def apply(op, x):
    """Matrix-free product ``op @ x`` for a vector or a block of column vectors."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[0] != 1 << op.n_sites:
        raise PreconditionError(f"vector length {x.shape[0]} does not match 2**{op.n_sites}")
    flips, signs, coeffs = string_masks(op)
    if x.ndim == 1:
        return _kernels.pauli_apply(flips, signs, coeffs, x)
    return np.column_stack([_kernels.pauli_apply(flips, signs, coeffs, np.ascontiguousarray(c)) for c in x.T])


def to_matrix(op, dense=False):
    """Certified Hermitian matrix of ``op`` (sparse unless ``dense``)."""
    if dense and op.n_sites > MAX_DENSE_SITES:
        raise CapacityError(f"{op.n_sites} sites exceeds the dense cap of {MAX_DENSE_SITES}")
    if not op.is_hermitian:
        raise NonHermitianError("PauliSum has complex coefficients")
    m = sparse_matrix(op)
    return HermitianOperator(m.toarray() if dense else m)


def named_operator(name):
    """Single-qubit operators accepted on the command line."""
    table = {"sigma_x": "x", "sigma_y": "y", "sigma_z": "z", "x": "x", "y": "y", "z": "z"}
    if name not in table:
        raise PreconditionError(f"unknown operator name {name!r}")
    return single(1, 1, table[name])
