"""Littlewood-Paley pieces of the rough kernel and their Fourier symbols.

Conventions
-----------
* Forward transform ``F(xi) = int f(x) exp(-2 pi i x.xi) dx``, no 2*pi in the
  measure.
* ``alpha`` is the smooth cutoff equal to 1 on ``(0, 1]`` and 0 on ``[2, inf)``;
  ``beta_j(r) = alpha(2**-j r) - alpha(2**(1-j) r)`` lives on
  ``[2**(j-1), 2**(j+1)]``.
* ``K0 = beta_0 K`` with ``K(x) = Omega(x/|x|)/|x|**2`` on the plane, and the
  shell symbol is ``m_j0 = beta_j * K0_hat``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .exceptions import DomainError, GridTooCoarse, InvalidParameter, OutOfRange
from .sphere import SphericalFunction

K0_SUPPORT = 2.0


def _psi(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def _alpha(t):
    """Vectorised alpha that also accepts ``t = 0`` (value 1)."""
    t = np.asarray(t, dtype=float)
    a = _psi(2.0 - t)
    b = _psi(t - 1.0)
    out = np.ones_like(t)
    mid = (t > 1.0) & (t < 2.0)
    out[mid] = a[mid] / (a[mid] + b[mid])
    out[t >= 2.0] = 0.0
    return out


def _beta(j, r):
    r = np.asarray(r, dtype=float)
    return _alpha(r * 2.0 ** (-j)) - _alpha(r * 2.0 ** (1 - j))


def alpha_eval(t):
    """Smooth cutoff ``alpha(t)`` for ``t > 0``."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("alpha is defined for t > 0 only")
    out = _alpha(arr)
    return float(out) if out.ndim == 0 else out


def beta_j_eval(j: int, r):
    """Annular cutoff ``beta_j(r)``, supported in ``[2**(j-1), 2**(j+1)]``."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("beta_j is defined for r > 0 only")
    out = _beta(j, arr)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Lattice:
    """Square frequency lattice ``spacing * {-n/2, ..., n/2 - 1}`` per axis."""

    spacing: float
    n: int

    @property
    def axis(self) -> np.ndarray:
        return self.spacing * (np.arange(self.n) - self.n // 2)

    @property
    def half_extent(self) -> float:
        return self.n * self.spacing / 2.0

    @classmethod
    def covering(cls, radius: float, spacing: float) -> "Lattice":
        n = int(2 * np.ceil(radius / spacing))
        return cls(spacing, max(n, 2))


@dataclass(frozen=True)
class SymbolGrid:
    """Complex samples of a 2-D symbol on a :class:`Lattice`.

    ``j`` is the dyadic shell index when the grid holds ``m_j0`` and ``None``
    for full-band grids such as ``K0_hat``.
    """

    values: np.ndarray
    lattice: Lattice
    j: int | None = None

    @property
    def axis(self) -> np.ndarray:
        return self.lattice.axis

    @property
    def spacing(self) -> float:
        return self.lattice.spacing

    @property
    def half_extent(self) -> float:
        return self.lattice.half_extent

    @property
    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def norm_l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)) * self.spacing)

    def radius(self) -> np.ndarray:
        ax = self.axis
        return np.hypot(ax[:, None], ax[None, :])

    def on_tensor(self, eta1, eta2) -> np.ndarray:
        """Bilinear interpolation on ``eta1 x eta2``; zero outside the hull."""
        return _bilinear(self, np.asarray(eta1, float)[:, None],
                         np.asarray(eta2, float)[None, :], strict=False)


def _bilinear(m: SymbolGrid, p1, p2, strict: bool):
    p1, p2 = np.broadcast_arrays(p1, p2)
    ax = m.axis
    lo, hi = ax[0], ax[-1]
    outside = (p1 < lo) | (p1 > hi) | (p2 < lo) | (p2 > hi)
    if strict and np.any(outside):
        raise OutOfRange("evaluation point outside the lattice hull")
    s1 = np.clip((p1 - lo) / m.spacing, 0, m.lattice.n - 1)
    s2 = np.clip((p2 - lo) / m.spacing, 0, m.lattice.n - 1)
    i1 = np.minimum(np.floor(s1).astype(np.int64), m.lattice.n - 2)
    i2 = np.minimum(np.floor(s2).astype(np.int64), m.lattice.n - 2)
    t1, t2 = s1 - i1, s2 - i2
    v = m.values
    out = ((1 - t1) * (1 - t2) * v[i1, i2] + t1 * (1 - t2) * v[i1 + 1, i2]
           + (1 - t1) * t2 * v[i1, i2 + 1] + t1 * t2 * v[i1 + 1, i2 + 1])
    if not strict:
        out = np.where(outside, 0.0, out)
    return out


def k0_samples(omega: SphericalFunction, x1, x2) -> np.ndarray:
    """``beta_0(|x|) Omega(x/|x|) / |x|**2`` on the tensor grid ``x1 x x2``."""
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    r = np.hypot(X1, X2)
    out = np.zeros_like(r)
    live = (r > 0.5) & (r < K0_SUPPORT)
    rl = r[live]
    out[live] = _beta(0, rl) * omega(np.arctan2(X2[live], X1[live])) / rl ** 2
    return out


class K0Transform:
    """Exact DFT of the sampled piece ``K0`` at arbitrary tensor frequencies.

    ``K0`` is sampled with step ``spatial_step`` on the symmetric grid covering
    its support ``|x| <= 2``; the transform at ``(eta1_a, eta2_b)`` is
    ``h**2 * sum K0(x) exp(-2 pi i x.eta)``, evaluated as two dense matrix
    products.  This is the zero-padded DFT of the sampled kernel restricted to
    the requested frequencies, so it agrees with an FFT on every lattice node.
    """

    def __init__(self, omega: SphericalFunction, spatial_step: float = 2.0 ** -8):
        m = int(round(K0_SUPPORT / spatial_step))
        self.omega = omega
        self.spatial_step = K0_SUPPORT / m
        self.x = self.spatial_step * np.arange(-m, m + 1)
        self.samples = k0_samples(omega, self.x, self.x)

    @property
    def nyquist(self) -> float:
        return 0.5 / self.spatial_step

    def _phases(self, eta):
        return np.exp(-2j * np.pi * np.multiply.outer(np.asarray(eta, float), self.x))

    def on_tensor(self, eta1, eta2, chunk: int = 1024) -> np.ndarray:
        eta1 = np.asarray(eta1, float)
        eta2 = np.asarray(eta2, float)
        e2 = self._phases(eta2).T
        out = np.empty((eta1.size, eta2.size), dtype=complex)
        h2 = self.spatial_step ** 2
        for start in range(0, eta1.size, chunk):
            e1 = self._phases(eta1[start:start + chunk])
            left = (e1.real @ self.samples) + 1j * (e1.imag @ self.samples)
            out[start:start + chunk] = (left @ e2) * h2
        return out


class ShellSymbol:
    """``m_j0 = beta_j * K0_hat`` with ``K0_hat`` from a :class:`K0Transform`."""

    def __init__(self, k0: K0Transform, j: int):
        self.k0 = k0
        self.j = j

    def on_tensor(self, eta1, eta2) -> np.ndarray:
        eta1 = np.asarray(eta1, float)
        eta2 = np.asarray(eta2, float)
        out = np.zeros((eta1.size, eta2.size), dtype=complex)
        edge = 2.0 ** (self.j + 1)
        rows = np.flatnonzero(np.abs(eta1) < edge)
        cols = np.flatnonzero(np.abs(eta2) < edge)
        if rows.size == 0 or cols.size == 0:
            return out
        e1, e2 = eta1[rows], eta2[cols]
        weight = _beta(self.j, np.hypot(e1[:, None], e2[None, :]))
        keep_r = np.any(weight != 0, axis=1)
        keep_c = np.any(weight != 0, axis=0)
        if not keep_r.any():
            return out
        block = self.k0.on_tensor(e1[keep_r], e2[keep_c]) * weight[np.ix_(keep_r, keep_c)]
        out[np.ix_(rows[keep_r], cols[keep_c])] = block
        return out


def compute_K0_hat(omega: SphericalFunction, lattice: Lattice, spatial_step: float | None = None,
                   method: str = "direct") -> SymbolGrid:
    """``K0_hat`` on a full-band lattice.

    ``method="fft"`` samples ``K0`` on ``[-L/2, L/2)**2`` with ``L = 1/spacing``
    and ``lattice.n`` points per axis and applies a 2-D FFT.  ``"direct"`` uses
    :class:`K0Transform` with the given spatial step (default: a power of two
    no coarser than 1/64 whose Nyquist frequency covers the lattice twice).
    """
    if method == "fft":
        if lattice.spacing > 1.0 / (2 * K0_SUPPORT):
            raise GridTooCoarse("frequency spacing must be <= 1/4 so the spatial box holds supp K0")
        L = 1.0 / lattice.spacing
        h = L / lattice.n
        x = h * (np.arange(lattice.n) - lattice.n // 2)
        samples = k0_samples(omega, x, x)
        values = np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(samples))) * h * h
        return SymbolGrid(values, lattice)
    if method != "direct":
        raise InvalidParameter(f"unknown method {method!r}")
    if spatial_step is None:
        spatial_step = 2.0 ** -max(6, int(np.ceil(np.log2(4 * lattice.half_extent))))
    if 0.5 / spatial_step < lattice.half_extent:
        raise GridTooCoarse("spatial step too coarse: Nyquist frequency below lattice extent")
    k0 = K0Transform(omega, spatial_step)
    ax = lattice.axis
    return SymbolGrid(k0.on_tensor(ax, ax), lattice)


def compute_m_j0(k0hat: SymbolGrid, j: int) -> SymbolGrid:
    """Restrict a full-band ``K0_hat`` grid to the shell ``beta_j``."""
    if k0hat.half_extent < 2.0 ** (j + 1):
        raise GridTooCoarse(f"lattice half-extent {k0hat.half_extent} < 2**(j+1) = {2.0 ** (j + 1)}")
    if k0hat.spacing > 2.0 ** (j - 1) / 2:
        raise GridTooCoarse("lattice spacing does not resolve the shell")
    weight = _beta(j, k0hat.radius())
    return SymbolGrid(k0hat.values * weight, k0hat.lattice, j)


def eval_m_jk(m: SymbolGrid, k: int, xi1, xi2, strict: bool = True):
    """``m_jk(xi) = m_j0(2**k xi)`` by bilinear interpolation on ``m``'s lattice."""
    scale = 2.0 ** k
    out = _bilinear(m, scale * np.asarray(xi1, float), scale * np.asarray(xi2, float), strict)
    return complex(out) if np.ndim(out) == 0 else out


SHELL_C1, SHELL_C2 = 0.25, 4.0


def shell_overlap_count(xi1, j: int, c1: float = SHELL_C1, c2: float = SHELL_C2) -> np.ndarray:
    """Number of ``k`` with ``c1 2**-k < |xi1| <= c2 2**(j-k)``.

    The half-open window has ``log2(c2 2**j / c1)`` dyadic steps, so the
    count is exactly ``j + 4`` for the default constants and every
    ``xi1 != 0``.
    """
    x = np.abs(np.asarray(xi1, dtype=float))
    if np.any(x == 0):
        raise DomainError("xi1 must be nonzero")
    # c1 2**-k < x  <=>  k > log2(c1 / x);  x <= c2 2**(j-k)  <=>  k <= j + log2(c2 / x)
    lo = np.floor(np.log2(c1 / x)) + 1
    hi = np.floor(j + np.log2(c2 / x))
    # repair rounding at exact dyadic endpoints
    lo = np.where(c1 * np.exp2(-(lo - 1)) < x, lo - 1, lo)
    lo = np.where(c1 * np.exp2(-lo) >= x, lo + 1, lo)
    hi = np.where(x <= c2 * np.exp2(j - (hi + 1)), hi + 1, hi)
    hi = np.where(x > c2 * np.exp2(j - hi), hi - 1, hi)
    return np.maximum(hi - lo + 1, 0).astype(np.int64)


@dataclass(frozen=True)
class EnvelopeReport:
    delta: float
    constant: float
    derivative_constant: float
    holds_fraction: float
    value_at_zero: float
    constant_inner: float
    constant_outer: float


def envelope_check(k0hat: SymbolGrid, delta: float) -> EnvelopeReport:
    """Fit ``C`` in ``|K0_hat| <= C min(|xi|, |xi|**-delta)`` over the lattice.

    The derivative proxy uses first differences along both axes against
    ``min(1, |xi|**-delta)``.  ``constant_inner``/``constant_outer`` are the
    fits restricted to the inner and outer halves of the radial range; decay
    at least as fast as the envelope shows up as ``inner >= outer``.
    """
    r = k0hat.radius()
    mag = np.abs(k0hat.values)
    zero = r == 0
    env = np.minimum(r, np.where(zero, 1.0, r) ** -delta)
    ratio = np.where(zero, 0.0, mag / np.where(zero, 1.0, env))
    C = float(ratio.max())
    at_zero = float(mag[zero].max()) if zero.any() else 0.0
    holds = float(np.mean(mag <= C * env * (1 + 1e-12) + (zero * at_zero)))
    h = k0hat.spacing
    d1 = np.abs(np.diff(k0hat.values, axis=0)) / h
    d2 = np.abs(np.diff(k0hat.values, axis=1)) / h
    r1 = np.maximum(r[:-1, :], r[1:, :])
    r2 = np.maximum(r[:, :-1], r[:, 1:])
    denv1 = np.minimum(1.0, np.where(r1 == 0, 1.0, r1) ** -delta)
    denv2 = np.minimum(1.0, np.where(r2 == 0, 1.0, r2) ** -delta)
    Cd = float(max((d1 / denv1).max(), (d2 / denv2).max()))
    cut = k0hat.half_extent / 2
    inner = (~zero) & (r <= cut)
    outer = r > cut
    return EnvelopeReport(delta, C, Cd, holds, at_zero,
                          float(ratio[inner].max()), float(ratio[outer].max()))


class SpatialShellKernel:
    """Pointwise values of ``K_j = sum_i K_j^i`` on the plane.

    ``K_j^0`` (the inverse transform of ``m_j0``) is computed by FFT on a
    periodic box of side ``period``; the other pieces follow from homogeneity,
    ``K_j^i(x) = 2**(-2i) K_j^0(2**-i x)``.
    """

    def __init__(self, omega: SphericalFunction, j: int, period: float = 16.0,
                 spatial_step: float | None = None):
        if spatial_step is None:
            spatial_step = min(2.0 ** (-j - 2), 2.0 ** -6)
        n = int(round(period / spatial_step))
        n += n % 2
        self.j = j
        self.period = period
        self.step = period / n
        x = self.step * (np.arange(n) - n // 2)
        samples = k0_samples(omega, x, x)
        spec = np.fft.rfft2(np.fft.ifftshift(samples))
        f1 = np.fft.fftfreq(n, d=self.step)
        f2 = np.fft.rfftfreq(n, d=self.step)
        spec *= _beta(j, np.hypot(f1[:, None], f2[None, :]))
        self.samples = np.fft.fftshift(np.fft.irfft2(spec, s=(n, n)))
        self.n = n
        self._reach = self.step * (n // 2 - 2)

    def piece0(self, y, z) -> np.ndarray:
        """Bilinear interpolation of ``K_j^0``; zero outside the box."""
        c1 = np.asarray(y, float) / self.step + self.n // 2
        c2 = np.asarray(z, float) / self.step + self.n // 2
        return ndimage.map_coordinates(self.samples, [c1.ravel(), c2.ravel()], order=1,
                                       mode="constant", cval=0.0).reshape(c1.shape)

    def __call__(self, y, z, terms: int = 40) -> np.ndarray:
        y, z = np.broadcast_arrays(np.asarray(y, float), np.asarray(z, float))
        size = np.maximum(np.abs(y), np.abs(z))
        safe = np.where(size > 0, size, self._reach)
        i_lo = np.ceil(np.log2(safe / self._reach)).astype(int)
        out = np.zeros(y.shape)
        for t in range(terms):
            i = i_lo + t
            s = 2.0 ** (-i)
            out += s * s * self.piece0(y * s, z * s)
        return out


@dataclass(frozen=True)
class CZCertificate:
    """Fitted Calderon-Zygmund constants from randomized triples."""

    j: int
    epsilon: float
    fitted_A: float
    fitted_A_smooth: float
    sample_count: int
    worst_ratio_size: float
    worst_ratio_smooth: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _draw_triples(rng: np.random.Generator, samples: int):
    # separation scales log-uniform in [2**-4, 2**6]
    scale = 2.0 ** rng.uniform(-4, 6, samples)
    angle = rng.uniform(0, 2 * np.pi, samples)
    y, z = scale * np.cos(angle), scale * np.sin(angle)
    # u = 0, v = -y, w = -z; perturbation of u bounded by (|u-v|+|u-w|)/3
    reach = (np.abs(y) + np.abs(z)) / 3.0
    du = reach * 2.0 ** rng.uniform(-10, 0, samples) * rng.choice([-1.0, 1.0], samples)
    return y, z, du


def cz_certificate(omega: SphericalFunction, j: int, epsilon: float = 0.5, samples: int = 500,
                   seed: int = 0, period: float = 16.0,
                   kernel: SpatialShellKernel | None = None) -> CZCertificate:
    """Size and smoothness constants of ``K_j(u - v, u - w)`` on random triples.

    Size: ``max |K_j| S**2`` with ``S = |u-v| + |u-w| + |v-w|``.  Smoothness:
    ``max |K_j(u'-v, u'-w) - K_j(u-v, u-w)| S**(2+eps) / |u-u'|**eps`` over
    perturbations with ``|u - u'| <= (|u-v| + |u-w|)/3``.  Degenerate triples
    (``S = 0`` or ``u' = u``) are redrawn.
    """
    if not 0 < epsilon < 1:
        raise InvalidParameter("epsilon must lie in (0, 1)")
    if samples < 100:
        raise InvalidParameter("need at least 100 samples")
    rng = np.random.default_rng(seed)
    y, z, du = _draw_triples(rng, samples)
    while True:
        S = np.abs(y) + np.abs(z) + np.abs(y - z)
        bad = (S == 0) | (du == 0)
        if not bad.any():
            break
        y[bad], z[bad], du[bad] = (a[: bad.sum()] for a in _draw_triples(rng, int(bad.sum())))
    if kernel is None:
        kernel = SpatialShellKernel(omega, j, period=period)
    base = kernel(y, z)
    moved = kernel(y + du, z + du)
    size = np.abs(base) * S ** 2
    smooth = np.abs(moved - base) * S ** (2 + epsilon) / np.abs(du) ** epsilon
    A = float(size.max())
    A_s = float(smooth.max())
    worst_size = float(size.max() / A) if A > 0 else 0.0
    worst_smooth = float(smooth.max() / A_s) if A_s > 0 else 0.0
    return CZCertificate(j, epsilon, A, A_s, samples, worst_size, worst_smooth)
