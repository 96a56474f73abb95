"""Bilinear Fourier multipliers on the line and the principal-value oracle.

All routines work on a periodic grid ``x_n = -L/2 + n h``, ``h = L/N``.  The
discrete multiplier is the exact lattice analogue of

    T_m(f, g)(x) = int int m(xi1, xi2) f^(xi1) g^(xi2) exp(2 pi i x (xi1 + xi2))

with frequency sums wrapping modulo the lattice, so test functions should be
band limited well below Nyquist and supported in the middle half.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .exceptions import GridMismatch, InvalidGrid, InvalidParameter, InvalidTruncation
from .kernel import K0Transform, _beta
from .sphere import SphericalFunction


@dataclass(frozen=True)
class LineFunction:
    """Samples on the uniform periodic grid of ``[-L/2, L/2)``."""

    samples: np.ndarray
    domain_half: float

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim != 1:
            raise InvalidGrid("samples must be one-dimensional")
        n = s.size
        if n < 2 or n & (n - 1):
            raise InvalidGrid(f"sample count must be a power of two, got {n}")
        if 2 * self.domain_half < 8:
            raise InvalidGrid("domain length L must be >= 8")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def length(self) -> float:
        return 2.0 * self.domain_half

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        return -self.domain_half + self.spacing * np.arange(self.n)

    @property
    def freqs(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, d=self.spacing)

    @property
    def nyquist(self) -> float:
        return 0.5 / self.spacing

    def same_grid(self, other: "LineFunction") -> bool:
        return self.n == other.n and self.domain_half == other.domain_half

    def middle(self) -> np.ndarray:
        return np.abs(self.x) < self.domain_half / 2

    def lp_norm(self, p: float = 2.0, middle: bool = False) -> float:
        v = np.abs(self.samples)
        if middle:
            v = v[self.middle()]
        if np.isinf(p):
            return float(v.max()) if v.size else 0.0
        return float((np.sum(v ** p) * self.spacing) ** (1.0 / p))

    def with_samples(self, samples) -> "LineFunction":
        return LineFunction(np.asarray(samples), self.domain_half)

    def interpolant(self, outside: float = 0.0):
        """Cubic spline through the samples; ``outside`` beyond the grid."""
        x = self.x
        s = self.samples
        spline = CubicSpline(x, s)
        lo, hi = x[0], x[-1]

        def ev(pts):
            pts = np.asarray(pts, float)
            out = spline(pts)
            return np.where((pts < lo) | (pts > hi), outside, out)
        return ev


PRESETS = ("gauss", "gauss_shift", "gauss_wide", "bump", "wave")


def preset_function(name: str, n: int = 2048, domain_half: float = 16.0) -> LineFunction:
    """Smooth test functions concentrated well inside the middle half."""
    x = -domain_half + (2 * domain_half / n) * np.arange(n)
    if name == "gauss":
        v = np.exp(-x ** 2)
    elif name == "gauss_shift":
        v = np.exp(-2.0 * (x - 0.5) ** 2)
    elif name == "gauss_wide":
        v = np.exp(-x ** 2 / 4.0)
    elif name == "bump":
        s = x / 2.0
        v = np.zeros_like(x)
        inside = np.abs(s) < 1
        v[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    elif name == "wave":
        v = np.exp(-x ** 2 / 2.0) * np.cos(2.0 * x)
    else:
        raise InvalidParameter(f"unknown preset {name!r}; expected one of {PRESETS}")
    return LineFunction(v, domain_half)


@dataclass(frozen=True)
class BilinearResult:
    output: LineFunction
    l1_norm: float
    l2_norm: float
    path: str
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_output(cls, out: LineFunction, path: str, **meta) -> "BilinearResult":
        return cls(out, out.lp_norm(1, middle=True), out.lp_norm(2, middle=True), path, meta)


def _tensor(m, e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    if np.isscalar(m):
        return np.full((e1.size, e2.size), m, dtype=complex)
    if hasattr(m, "on_tensor"):
        return np.asarray(m.on_tensor(e1, e2))
    vals = m(e1[:, None], e2[None, :])
    return np.broadcast_to(np.asarray(vals), (e1.size, e2.size))


def _spectrum(f: LineFunction, tol: float):
    F = np.fft.fft(f.samples)
    mag = np.abs(F)
    top = mag.max()
    keep = np.flatnonzero(mag > tol * top) if top > 0 else np.array([], dtype=np.int64)
    return F, keep


def apply_multiplier(m, f: LineFunction, g: LineFunction, k: int = 0,
                     spectral_tol: float = 1e-15) -> BilinearResult:
    """Discrete bilinear multiplier with symbol ``m(2**k xi1, 2**k xi2)``.

    ``m`` is a scalar, an object with ``on_tensor(eta1, eta2)`` or a callable
    broadcasting over ``(eta1[:, None], eta2[None, :])``.  Spectral bins whose
    magnitude is below ``spectral_tol`` times the peak are skipped.
    """
    out = _accumulate(m, f, g, (k,), spectral_tol)
    return BilinearResult.from_output(out, "fourier", k=[k])


def _symbol_block(m, xi_rows, xi_cols, ks) -> np.ndarray:
    """``sum_k m(2**k xi_rows, 2**k xi_cols)`` as a dense block."""
    block = np.zeros((xi_rows.size, xi_cols.size), dtype=complex)
    for k in ks:
        s = 2.0 ** k
        block += _tensor(m, s * xi_rows, s * xi_cols)
    return block


def _scatter(f, F, G, rows, cols, block):
    n = f.n
    acc = np.zeros(n, dtype=complex)
    if rows.size and cols.size:
        idx = ((rows[:, None] + cols[None, :]) % n).ravel()
        w = (block * F[rows][:, None] * G[cols][None, :]).ravel()
        acc += np.bincount(idx, weights=w.real, minlength=n)
        acc += 1j * np.bincount(idx, weights=w.imag, minlength=n)
    return f.with_samples(np.fft.ifft(acc) / n)


def _accumulate(m, f, g, ks, spectral_tol):
    if not f.same_grid(g):
        raise GridMismatch("f and g must live on the same grid")
    F, rows = _spectrum(f, spectral_tol)
    G, cols = _spectrum(g, spectral_tol)
    xi = f.freqs
    block = _symbol_block(m, xi[rows], xi[cols], ks) if rows.size and cols.size else None
    if block is None:
        return f.with_samples(np.zeros(f.n, dtype=complex))
    return _scatter(f, F, G, rows, cols, block)


class PrecomputedMultiplier:
    """Bilinear multiplier with its symbol tabulated on fixed spectral bins.

    Inputs are assumed band limited to ``bins``; their spectrum elsewhere is
    ignored.  Useful when many pairs are pushed through the same operator.
    """

    def __init__(self, m, template: LineFunction, bins, ks=(0,)):
        self.template = template
        self.bins = np.asarray(bins, dtype=np.int64)
        xi = template.freqs[self.bins]
        self.ks = list(ks)
        self.block = _symbol_block(m, xi, xi, self.ks)

    def __call__(self, f: LineFunction, g: LineFunction) -> BilinearResult:
        if not (f.same_grid(self.template) and g.same_grid(self.template)):
            raise GridMismatch("inputs must live on the template grid")
        F = np.fft.fft(f.samples)
        G = np.fft.fft(g.samples)
        out = _scatter(f, F, G, self.bins, self.bins, self.block)
        return BilinearResult.from_output(out, "fourier", k=self.ks)


def support_radii(m) -> tuple[float, float] | None:
    """Inner/outer radius of a shell symbol's support, if known."""
    radii = getattr(m, "support_radii", None)
    if radii is not None:
        return radii
    j = getattr(m, "j", None)
    if j is None:
        return None
    return 2.0 ** (j - 1), 2.0 ** (j + 1)


def resolvable_k(m, f: LineFunction) -> range:
    """Dilations ``k`` for which ``m(2**k .)`` meets the nonzero frequency lattice."""
    radii = support_radii(m)
    if radii is None:
        raise InvalidParameter("symbol carries no shell index; pass k_range explicitly")
    r_in, r_out = radii
    lo = 1.0 / f.length
    hi = np.sqrt(2.0) * f.nyquist
    k_lo = int(np.floor(np.log2(r_in / hi)))
    k_hi = int(np.ceil(np.log2(r_out / lo)))
    ks = [k for k in range(k_lo, k_hi + 1)
          if r_out * 2.0 ** -k >= lo and r_in * 2.0 ** -k <= hi]
    return range(ks[0], ks[-1] + 1)


def apply_T_j(mset, k_range, f: LineFunction, g: LineFunction,
              spectral_tol: float = 1e-15) -> BilinearResult:
    """``sum_{k in k_range} T_{m(2**k .)}(f, g)`` for a shell symbol ``m``.

    ``k_range=None`` uses every resolvable dilation.  The report in
    ``meta`` lists requested dilations that fall entirely above Nyquist or
    below the frequency resolution, and resolvable ones left out of the range.
    """
    resolved = resolvable_k(mset, f)
    ks = list(resolved) if k_range is None else list(k_range)
    meta = {"k": ks, "above_nyquist": [], "below_resolution": [],
            "omitted": [k for k in resolved if k not in ks],
            "tail_below_resolution_from": resolved.stop}
    r_in, r_out = support_radii(mset)
    for k in ks:
        if r_in * 2.0 ** -k > np.sqrt(2.0) * f.nyquist:
            meta["above_nyquist"].append(k)
        elif r_out * 2.0 ** -k < 1.0 / f.length:
            meta["below_resolution"].append(k)
    live = [k for k in ks if k in resolved]
    out = _accumulate(mset, f, g, live, spectral_tol)
    return BilinearResult.from_output(out, "fourier", **meta)


class ShellSum:
    """``(sum_{j in js} beta_j) * K0_hat``, the symbol of ``sum_j T_j`` at ``k = 0``.

    Reuses one :class:`K0Transform` for all shells, so a multi-shell sum costs
    one pass per dilation.
    """

    def __init__(self, k0: K0Transform, js):
        self.k0 = k0
        self.js = sorted(int(j) for j in js)
        self.support_radii = (2.0 ** (self.js[0] - 1), 2.0 ** (self.js[-1] + 1))

    def weight(self, r):
        return sum(_beta(j, r) for j in self.js)

    def on_tensor(self, eta1, eta2) -> np.ndarray:
        eta1 = np.asarray(eta1, float)
        eta2 = np.asarray(eta2, float)
        out = np.zeros((eta1.size, eta2.size), dtype=complex)
        r_in, r_out = self.support_radii
        rows = np.flatnonzero(np.abs(eta1) < r_out)
        cols = np.flatnonzero(np.abs(eta2) < r_out)
        if rows.size == 0 or cols.size == 0:
            return out
        w = self.weight(np.hypot(eta1[rows][:, None], eta2[cols][None, :]))
        kr = np.any(w != 0, axis=1)
        kc = np.any(w != 0, axis=0)
        if not kr.any():
            return out
        block = self.k0.on_tensor(eta1[rows][kr], eta2[cols][kc]) * w[np.ix_(kr, kc)]
        out[np.ix_(rows[kr], cols[kc])] = block
        return out


def apply_T_sum(omega: SphericalFunction, js, f: LineFunction, g: LineFunction,
                spatial_step: float = 2.0 ** -8) -> BilinearResult:
    """``sum_{j in js} T_j(f, g)`` over all resolvable dilations."""
    sym = ShellSum(K0Transform(omega, spatial_step), js)
    res = apply_T_j(sym, None, f, g)
    return BilinearResult(res.output, res.l1_norm, res.l2_norm, res.path, {**res.meta, "j": sym.js})


def _log_nodes(eps: float, R: float, panels: int, order: int):
    """Composite Gauss-Legendre nodes in ``s = log r`` with weights for ``dr/r``."""
    t, w = leggauss(order)
    edges = np.linspace(np.log(eps), np.log(R), panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    s = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    return np.exp(s), ws


def _check_truncation(eps, R, f):
    if R is None:
        R = f.length / 4
    if not eps < R:
        raise InvalidTruncation(f"need eps < R, got eps={eps}, R={R}")
    if eps <= 0 or R > f.length / 4 + 1e-12:
        raise InvalidTruncation("need 0 < eps and R <= L/4")
    return R


def direct_pv_quadrature(omega: SphericalFunction, f: LineFunction, g: LineFunction, x_points,
                         eps: float = 1e-3, R: float | None = None, panels: int = 64,
                         order: int = 6, chunk: int = 4) -> np.ndarray:
    """Truncated principal value in polar form.

    Computes ``int_eps^R int Omega(theta) f(x - r cos theta) g(x - r sin theta)
    dtheta dr / r`` with composite Gauss-Legendre nodes in ``log r`` and the
    periodic trapezoid rule on Omega's own angular grid; ``f`` and ``g`` are
    evaluated by cubic splines.
    """
    if not f.same_grid(g):
        raise GridMismatch("f and g must live on the same grid")
    R = _check_truncation(eps, R, f)
    x_points = np.atleast_1d(np.asarray(x_points, float))
    r, wr = _log_nodes(eps, R, panels, order)
    c, s = np.cos(omega.theta), np.sin(omega.theta)
    weight = omega.values * omega.step
    fi, gi = f.interpolant(), g.interpolant()
    rc = np.multiply.outer(r, c)
    rs = np.multiply.outer(r, s)
    out = np.empty(x_points.size, dtype=complex)
    for start in range(0, x_points.size, chunk):
        xs = x_points[start:start + chunk]
        fv = fi(xs[:, None, None] - rc[None])
        gv = gi(xs[:, None, None] - rs[None])
        out[start:start + chunk] = np.einsum("xrt,t,r->x", fv * gv, weight, wr)
    return out


def directional_bht(f: LineFunction, g: LineFunction, theta0: float, x_points,
                    eps: float = 1e-3, R: float | None = None, panels: int = 64,
                    order: int = 6) -> np.ndarray:
    """``int_eps^R [f(x - t c) g(x - t s) - f(x + t c) g(x + t s)] dt / t``."""
    R = _check_truncation(eps, R, f)
    x_points = np.atleast_1d(np.asarray(x_points, float))
    t, wt = _log_nodes(eps, R, panels, order)
    c, s = np.cos(theta0), np.sin(theta0)
    fi, gi = f.interpolant(), g.interpolant()
    X = x_points[:, None]
    vals = fi(X - t * c) * gi(X - t * s) - fi(X + t * c) * gi(X + t * s)
    return vals @ wt


def fft_hilbert(f: LineFunction, pad: int = 8) -> LineFunction:
    """Hilbert transform with multiplier ``-i sign(xi)``.

    ``f`` is zero padded to ``pad`` times its length first, so the result
    approximates the transform on the line rather than the periodic one.
    """
    if pad < 1:
        raise InvalidParameter("pad must be >= 1")
    n = f.n
    big = np.zeros(n * pad, dtype=np.result_type(f.samples, float))
    start = (n * pad - n) // 2
    big[start:start + n] = f.samples
    xi = np.fft.fftfreq(n * pad, d=f.spacing)
    H = np.fft.ifft(-1j * np.sign(xi) * np.fft.fft(big))[start:start + n]
    if np.isrealobj(f.samples):
        H = H.real
    return f.with_samples(H)


def antiderivative(a: LineFunction) -> LineFunction:
    """``A(x) = int_{-L/2}^x a``, cumulative Simpson rule."""
    samples = np.asarray(a.samples)
    A = cumulative_simpson(samples, dx=a.spacing, initial=0)
    return a.with_samples(A)


def calderon_commutator(a: LineFunction, f: LineFunction, eps: float = 1e-3,
                        R: float | None = None, panels: int = 64, order: int = 6) -> LineFunction:
    """Truncated ``p.v. int (A(x) - A(y)) / (x - y)**2 f(y) dy`` with ``A' = a``.

    Uses the symmetrized form
    ``int_eps^R [(A(x) - A(x-t)) f(x-t) + (A(x) - A(x+t)) f(x+t)] dt / t**2``
    whose integrand stays bounded as ``t -> 0``.  Values are computed on the
    middle half of the grid (so every node used lies in the domain) and set
    to zero elsewhere.
    """
    if not a.same_grid(f):
        raise GridMismatch("a and f must live on the same grid")
    R = _check_truncation(eps, R, f)
    t, wt = _log_nodes(eps, R, panels, order)
    # dr / r weights times an extra 1/t give dt / t**2
    wt = wt / t
    Ai = antiderivative(a).interpolant()
    fi = f.interpolant()
    mid = f.middle()
    X = f.x[mid][:, None]
    A0 = Ai(X)
    vals = (A0 - Ai(X - t)) * fi(X - t) + (A0 - Ai(X + t)) * fi(X + t)
    out = np.zeros(f.n, dtype=np.result_type(a.samples, f.samples, float))
    out[mid] = vals @ wt
    return f.with_samples(out)


def calderon_via_T_omega(omega: SphericalFunction, a: LineFunction, f: LineFunction,
                         eps: float = 1e-3, R: float | None = None, **kw) -> LineFunction:
    """Commutator through the rough operator: ``T_Omega(f, a)`` on the middle half."""
    mid = f.middle()
    out = np.zeros(f.n, dtype=float if np.isrealobj(f.samples) and np.isrealobj(a.samples) else complex)
    vals = direct_pv_quadrature(omega, f, a, f.x[mid], eps=eps, R=R, **kw)
    out[mid] = vals.real if np.isrealobj(out) else vals
    return f.with_samples(out)
