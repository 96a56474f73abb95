"""Compactly supported Daubechies wavelets and the tensor basis on the plane.

The father ``phi`` and mother ``psi`` with ``M`` vanishing moments live on
``[0, 2M - 1]``.  The 2-D family is

    Psi^{lam, G}_mu(xi) = 2**lam psi_G1(2**lam xi1 - mu1) psi_G2(2**lam xi2 - mu2)

with ``G = (F, F)`` allowed only at ``lam = 0``.  Inner products with a symbol
sampled on a lattice are Riemann sums, computed separably with sparse
per-axis basis matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import sparse
from scipy.special import comb

from .exceptions import GridTooCoarse, InsufficientData, InvalidParameter, UnsupportedOrder
from .fit import linear_fit
from .kernel import Lattice, SymbolGrid

SUPPORTED_ORDERS = (4, 6, 8, 10)
FATHER, MOTHER = 0, 1
LABELS = ("F", "M")


@lru_cache(maxsize=None)
def _daubechies(M: int) -> tuple:
    # |m0|^2 = cos^{2M}(w/2) P(sin^2(w/2)); pick the roots of P inside the unit circle
    q = np.zeros(2 * M - 1)
    base = np.array([-0.25, 0.5, -0.25])
    for k in range(M):
        term = np.array([comb(M - 1 + k, k)])
        for _ in range(k):
            term = P.polymul(term, base)
        term = np.concatenate([np.zeros(M - 1 - k), term])
        q[:term.size] += term
    roots = np.roots(q[::-1])
    h = np.array([1.0])
    for r in roots[np.abs(roots) < 1]:
        h = P.polymul(h, [-r, 1.0])
    for _ in range(M):
        h = P.polymul(h, [1.0, 1.0])
    h = np.real(h)
    return tuple(h * np.sqrt(2.0) / h.sum())


def daubechies_filter(M: int) -> np.ndarray:
    """Low-pass taps of the extremal-phase Daubechies filter with ``M`` moments."""
    if M not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(f"M must be one of {SUPPORTED_ORDERS}, got {M}")
    return np.array(_daubechies(M))


def _cascade(h: np.ndarray, depth: int) -> np.ndarray:
    """Father values on ``2**-depth`` multiples of ``[0, len(h) - 1]``.

    Integer values come from the eigenvector of the two-scale matrix; each
    dyadic refinement then applies the refinement equation exactly.
    """
    L = h.size - 1
    A = np.zeros((L + 1, L + 1))
    for n in range(L + 1):
        for k in range(L + 1):
            m = 2 * n - k
            if 0 <= m <= L:
                A[n, m] += np.sqrt(2.0) * h[k]
    w, v = np.linalg.eig(A)
    vals = np.real(v[:, np.argmin(np.abs(w - 1))])
    vals = vals / vals.sum()
    for d in range(1, depth + 1):
        new = np.zeros(L * 2 ** d + 1)
        new[::2] = vals
        idx = np.arange(1, L * 2 ** d, 2)
        for k in range(L + 1):
            src = idx - k * 2 ** (d - 1)
            ok = (src >= 0) & (src <= L * 2 ** (d - 1))
            new[idx[ok]] += np.sqrt(2.0) * h[k] * vals[src[ok]]
        vals = new
    return vals


@dataclass(frozen=True)
class WaveletPair:
    """Father and mother tables on the dyadic grid ``2**-depth * {0..S 2**depth}``."""

    vanishing_moments: int
    refinement_depth: int
    filter: np.ndarray
    father_samples: np.ndarray
    mother_samples: np.ndarray

    @property
    def support(self) -> int:
        return 2 * self.vanishing_moments - 1

    @property
    def step(self) -> float:
        return 2.0 ** -self.refinement_depth

    @property
    def grid(self) -> np.ndarray:
        return self.step * np.arange(self.father_samples.size)

    def table(self, kind: int) -> np.ndarray:
        return self.father_samples if kind == FATHER else self.mother_samples

    def max_abs(self, kind: int) -> float:
        return float(np.max(np.abs(self.table(kind))))

    def evaluate(self, kind: int, t) -> np.ndarray:
        """Linear interpolation of the table, zero outside the support.

        Exact at dyadic points of depth ``<= refinement_depth``.
        """
        t = np.asarray(t, float)
        pos = t * 2.0 ** self.refinement_depth
        i = np.floor(pos).astype(np.int64)
        frac = pos - i
        tab = self.table(kind)
        last = tab.size - 1
        ok = (i >= 0) & (i <= last)
        i0 = np.clip(i, 0, last)
        i1 = np.clip(i + 1, 0, last)
        out = tab[i0] + frac * (np.where(i + 1 <= last, tab[i1], 0.0) - tab[i0])
        return np.where(ok, out, 0.0)


@lru_cache(maxsize=16)
def _build(M: int, depth: int) -> WaveletPair:
    h = daubechies_filter(M)
    L = h.size - 1
    phi = _cascade(h, depth)
    g = np.array([(-1) ** k * h[L - k] for k in range(L + 1)])
    t = np.arange(phi.size)
    psi = np.zeros_like(phi)
    for k in range(L + 1):
        src = 2 * t - k * 2 ** depth
        ok = (src >= 0) & (src <= L * 2 ** depth)
        psi[ok] += np.sqrt(2.0) * g[k] * phi[src[ok]]
    for arr in (h, phi, psi):
        arr.setflags(write=False)
    return WaveletPair(M, depth, h, phi, psi)


def build_wavelet_pair(M: int = 8, refinement_depth: int = 12) -> WaveletPair:
    """Daubechies pair with ``M`` vanishing moments by the cascade algorithm."""
    if M not in SUPPORTED_ORDERS:
        raise UnsupportedOrder(f"M must be one of {SUPPORTED_ORDERS}, got {M}")
    if not 8 <= refinement_depth <= 14:
        raise InvalidParameter(f"refinement depth must lie in [8, 14], got {refinement_depth}")
    return _build(M, refinement_depth)


def allowed_types(lam: int) -> list[tuple[int, int]]:
    types = [(FATHER, MOTHER), (MOTHER, FATHER), (MOTHER, MOTHER)]
    return ([(FATHER, FATHER)] + types) if lam == 0 else types


def basis_matrix(wp: WaveletPair, kind: int, lam: int, points, mu_lo: int, mu_hi: int):
    """Sparse ``(mu, point)`` matrix of ``2**(lam/2) psi_kind(2**lam p - mu)``."""
    points = np.asarray(points, float)
    u = points * 2.0 ** lam
    base = np.floor(u).astype(np.int64)
    rows, cols, vals = [], [], []
    idx = np.arange(points.size)
    for o in range(wp.support + 1):
        mu = base - o
        t = u - mu
        ok = (mu >= mu_lo) & (mu <= mu_hi) & (t <= wp.support)
        if not ok.any():
            continue
        v = wp.evaluate(kind, t[ok]) * 2.0 ** (lam / 2)
        nz = v != 0
        rows.append(mu[ok][nz] - mu_lo)
        cols.append(idx[ok][nz])
        vals.append(v[nz])
    shape = (mu_hi - mu_lo + 1, points.size)
    if not rows:
        return sparse.csr_matrix(shape)
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=shape)


def mu_range(lam: int, radius: float, support: int, margin: int = 2) -> tuple[int, int]:
    """Translations whose support ``[mu, mu + S] 2**-lam`` can meet ``[-radius, radius]``."""
    lo = int(np.floor(-radius * 2.0 ** lam)) - support - margin
    hi = int(np.ceil(radius * 2.0 ** lam)) + margin
    return lo, hi


@dataclass(frozen=True)
class WaveletCoeffSet:
    """Coefficients ``a = <Psi^{lam,G}_mu, m>`` stored column-wise.

    ``g1``/``g2`` are 0 for the father and 1 for the mother.
    """

    lam: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    a: np.ndarray
    lambda_max: int
    source_j: int | None
    M: int

    def __len__(self) -> int:
        return int(self.a.size)

    @classmethod
    def empty(cls, lambda_max: int, source_j, M: int) -> "WaveletCoeffSet":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z, z, z, z, np.zeros(0, complex), lambda_max, source_j, M)

    @classmethod
    def concat(cls, parts: list, lambda_max: int, source_j, M: int) -> "WaveletCoeffSet":
        if not parts:
            return cls.empty(lambda_max, source_j, M)
        cols = [np.concatenate([p[i] for p in parts]) for i in range(6)]
        return cls(*cols, lambda_max=lambda_max, source_j=source_j, M=M)

    def subset(self, index) -> "WaveletCoeffSet":
        index = np.asarray(index)
        if index.dtype != bool:
            index = index.astype(np.int64)
            if index.size and (index.min() < 0 or index.max() >= len(self)):
                raise IndexError("selection refers to a coefficient outside the set")
        return WaveletCoeffSet(self.lam[index], self.g1[index], self.g2[index], self.mu1[index],
                               self.mu2[index], self.a[index], self.lambda_max, self.source_j, self.M)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.a) ** 2))

    def b(self, wp: WaveletPair) -> np.ndarray:
        """``b = ||a Psi||_inf = |a| 2**lam max|psi_G1| max|psi_G2|``."""
        peak = np.array([wp.max_abs(FATHER), wp.max_abs(MOTHER)])
        return np.abs(self.a) * 2.0 ** self.lam * peak[self.g1] * peak[self.g2]

    def group_keys(self) -> np.ndarray:
        """Rows ``(lam, g1, g2, mu1 mod S, mu2 mod S)``: disjoint-support classes."""
        S = 2 * self.M - 1
        return np.stack([self.lam, self.g1, self.g2, self.mu1 % S, self.mu2 % S], axis=1)

    def support_boxes(self) -> np.ndarray:
        """``(a1, b1, a2, b2)`` per coefficient: the box ``[a1, b1] x [a2, b2]``."""
        S = 2 * self.M - 1
        s = 2.0 ** -self.lam
        return np.stack([self.mu1 * s, (self.mu1 + S) * s, self.mu2 * s, (self.mu2 + S) * s], axis=1)

    def max_by_level(self) -> dict[int, float]:
        return {int(l): float(np.abs(self.a[self.lam == l]).max())
                for l in np.unique(self.lam)}


def analysis_lattice(j: int, lambda_max: int) -> Lattice:
    """Lattice of step ``2**(-lambda_max - 3)`` covering the shell ``|xi| <= 2**(j+1)``."""
    return Lattice.covering(2.0 ** (j + 1), 2.0 ** (-lambda_max - 3))


def analyze(m: SymbolGrid, wp: WaveletPair, lambda_max: int, tol: float = 1e-14) -> WaveletCoeffSet:
    """Lattice inner products of ``m`` with every basis cell meeting its support."""
    if lambda_max < 0:
        raise InvalidParameter("lambda_max must be >= 0")
    if m.spacing > 2.0 ** (-lambda_max - 2):
        raise GridTooCoarse(f"lattice spacing {m.spacing} > 2**-(lambda_max+2)")
    V = np.asarray(m.values)
    rows = np.flatnonzero(np.any(V != 0, axis=1))
    if rows.size == 0:
        return WaveletCoeffSet.empty(lambda_max, m.j, wp.vanishing_moments)
    cols = np.flatnonzero(np.any(V != 0, axis=0))
    V = V[np.ix_(rows, cols)]
    ax = m.axis
    p1, p2 = ax[rows], ax[cols]
    radius = float(max(np.abs(p1).max(), np.abs(p2).max()))
    h2 = m.spacing ** 2
    parts = []
    for lam in range(lambda_max + 1):
        lo, hi = mu_range(lam, radius, wp.support)
        B1 = {k: basis_matrix(wp, k, lam, p1, lo, hi) for k in (FATHER, MOTHER)}
        B2 = {k: basis_matrix(wp, k, lam, p2, lo, hi) for k in (FATHER, MOTHER)}
        left = {k: np.asarray(B1[k] @ V) for k in (FATHER, MOTHER)}
        for g1, g2 in allowed_types(lam):
            A = np.asarray((B2[g2] @ left[g1].T).T) * h2
            i1, i2 = np.nonzero(np.abs(A) >= tol)
            n = i1.size
            parts.append((np.full(n, lam), np.full(n, g1), np.full(n, g2),
                          i1 + lo, i2 + lo, A[i1, i2]))
    return WaveletCoeffSet.concat(parts, lambda_max, m.j, wp.vanishing_moments)


def _synth_tensor(coeffs: WaveletCoeffSet, wp: WaveletPair, p1, p2) -> np.ndarray:
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    out = np.zeros((p1.size, p2.size), dtype=complex)
    if len(coeffs) == 0:
        return out
    keys = np.stack([coeffs.lam, coeffs.g1, coeffs.g2], axis=1)
    for lam, g1, g2 in np.unique(keys, axis=0):
        sel = (coeffs.lam == lam) & (coeffs.g1 == g1) & (coeffs.g2 == g2)
        m1, m2, a = coeffs.mu1[sel], coeffs.mu2[sel], coeffs.a[sel]
        lo1, hi1 = int(m1.min()), int(m1.max())
        lo2, hi2 = int(m2.min()), int(m2.max())
        A = np.zeros((hi1 - lo1 + 1, hi2 - lo2 + 1), dtype=complex)
        np.add.at(A, (m1 - lo1, m2 - lo2), a)
        B1 = basis_matrix(wp, int(g1), int(lam), p1, lo1, hi1)
        B2 = basis_matrix(wp, int(g2), int(lam), p2, lo2, hi2)
        if B1.nnz == 0 or B2.nnz == 0:
            continue
        inner = np.asarray(B2.T @ A.T).T
        out += np.asarray(B1.T @ inner)
    return out


def synthesize(coeffs: WaveletCoeffSet, wp: WaveletPair, target: Lattice) -> SymbolGrid:
    """``sum a Psi`` sampled on ``target``."""
    ax = target.axis
    return SymbolGrid(_synth_tensor(coeffs, wp, ax, ax), target, coeffs.source_j)


class WaveletSymbol:
    """A (partial) wavelet expansion usable as a multiplier symbol."""

    def __init__(self, coeffs: WaveletCoeffSet, wp: WaveletPair):
        self.coeffs = coeffs
        self.wp = wp
        self.j = coeffs.source_j

    def on_tensor(self, eta1, eta2) -> np.ndarray:
        return _synth_tensor(self.coeffs, self.wp, eta1, eta2)


@dataclass(frozen=True)
class CoeffDecay:
    lambdas: list
    max_abs: list
    slope: float
    intercept: float
    r_squared: float
    delta: float | None = None
    js: list | None = None
    j_slopes: dict | None = None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def coeff_decay_report(coeffs, delta: float | None = None) -> CoeffDecay:
    """Per-level maxima of ``|a|`` and their log2 slopes in ``lam`` (and ``j``).

    ``coeffs`` is one :class:`WaveletCoeffSet` or a list of them from
    different shells; with several shells the ``lam`` fit uses the first and
    ``j_slopes[lam]`` is the slope of ``log2 max|a|`` against ``j``.
    """
    sets = [coeffs] if isinstance(coeffs, WaveletCoeffSet) else list(coeffs)
    if not sets:
        raise InsufficientData("no coefficient sets")
    first = sets[0].max_by_level()
    if len(first) < 2:
        raise InsufficientData("need at least two lambda levels")
    lams = sorted(first)
    vals = [first[l] for l in lams]
    slope, icpt, r2 = linear_fit(lams, np.log2(vals))
    js = j_slopes = None
    if len(sets) > 1:
        js = [s.source_j for s in sets]
        per = [s.max_by_level() for s in sets]
        j_slopes = {}
        for l in lams:
            if all(l in p for p in per):
                j_slopes[l] = linear_fit(js, np.log2([p[l] for p in per]))[0]
    return CoeffDecay(lams, vals, slope, icpt, r2, delta, js, j_slopes)
