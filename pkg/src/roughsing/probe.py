"""Randomized norm probing, decay fits and the interpolation region."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bilinear import BilinearResult, LineFunction
from .exceptions import InsufficientData, InvalidBand, InvalidTriple, OutOfScope, InvalidParameter
from .fit import linear_fit

METRICS = ("sym_inf", "sym_l2", "op_l2l2l1", "op_p1p2p", "coeff_max")


@dataclass
class DecayReport:
    rows: list = field(default_factory=list)
    fits: list = field(default_factory=list)

    def add(self, j: int, metric: str, value: float) -> None:
        if metric not in METRICS:
            raise InvalidParameter(f"unknown metric {metric!r}")
        self.rows.append({"j": int(j), "metric": metric, "value": float(value)})

    def refit(self) -> list:
        self.fits = fit_decay(self.rows)
        return self.fits

    def fit_for(self, metric: str) -> dict:
        for f in self.fits:
            if f["metric"] == metric:
                return f
        raise KeyError(metric)


def fit_decay(rows) -> list:
    """Least-squares line of ``log2 value`` against ``j`` per metric.

    Slopes ``>= 0`` carry the flag ``NO_DECAY``.
    """
    by_metric: dict = {}
    for row in rows:
        by_metric.setdefault(row["metric"], []).append(row)
    if not by_metric:
        raise InsufficientData("no rows to fit")
    fits = []
    for metric, rs in by_metric.items():
        if len(rs) < 3:
            raise InsufficientData(f"metric {metric} has {len(rs)} rows, need >= 3")
        js = [r["j"] for r in rs]
        vals = np.array([r["value"] for r in rs], float)
        if np.any(vals <= 0):
            raise InsufficientData(f"metric {metric} has non-positive values")
        slope, icpt, r2 = linear_fit(js, np.log2(vals))
        fits.append({"metric": metric, "slope": slope, "intercept": icpt, "r_squared": r2,
                     "flag": "NO_DECAY" if slope >= -1e-12 else "DECAY"})
    return fits


def _dual(q) -> Fraction | None:
    if q == np.inf:
        return Fraction(1)
    q = Fraction(q)
    return q / (q - 1)


@dataclass(frozen=True)
class RegionSpec:
    """Exponent neighbourhood of ``(1/2, 1/2, 1)`` in exact arithmetic.

    ``t_max`` bounds the segments ``(1 - t) A + t B`` from ``A = (1/2,1/2,1)``
    to the boundary ``B`` of the rhombus.  ``inv_p_min`` follows the
    sharpness count ``1/p - 1 = delta/(8n)``, which corresponds to ``t =
    2 t_max`` along ``B0 = (1, 1, 2)``; ``inv_p_at_t_max = 1 + t_max`` is the
    value reached inside the stated neighbourhood.
    """

    n: int
    q: float
    q_dual: Fraction
    delta: Fraction
    t_max: Fraction
    eta_max: Fraction
    inv_p_min: Fraction
    inv_p_at_t_max: Fraction

    @property
    def p_min(self) -> Fraction:
        return 1 / self.inv_p_min

    @property
    def area(self) -> Fraction:
        """Area of the ``(1/p1, 1/p2)`` projection: a square of side ``t_max``."""
        return self.t_max ** 2

    def t_of(self, inv_p1, inv_p2, inv_p) -> Fraction | None:
        """Segment parameter of a point, or ``None`` if it is off the rhombus plane."""
        x1, x2, x3 = Fraction(inv_p1), Fraction(inv_p2), Fraction(inv_p)
        if x3 != x1 + x2 or not (0 <= x1 <= 1 and 0 <= x2 <= 1):
            return None
        half = Fraction(1, 2)
        return 2 * max(abs(x1 - half), abs(x2 - half))

    def contains(self, inv_p1, inv_p2, inv_p) -> bool:
        t = self.t_of(inv_p1, inv_p2, inv_p)
        return t is not None and t <= self.t_max

    def to_dict(self) -> dict:
        out = {"n": self.n, "q": "inf" if self.q == np.inf else float(self.q)}
        for name in ("q_dual", "delta", "t_max", "eta_max", "inv_p_min", "inv_p_at_t_max"):
            v = getattr(self, name)
            out[name] = str(v)
            out[name + "_float"] = float(v)
        out["p_min"] = str(self.p_min)
        out["area"] = str(self.area)
        return out


def interpolation_region(n: int = 1, q=np.inf, delta=None) -> RegionSpec:
    """Region for ``Omega in L^q`` with ``delta = 1/(16 q')`` unless overridden."""
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    if q != np.inf and Fraction(q) < 2:
        raise OutOfScope("q < 2 is not covered")
    qd = _dual(q)
    cap = 1 / (8 * qd)
    d = Fraction(1) / (16 * qd) if delta is None else Fraction(delta)
    if not 0 < d < cap:
        raise InvalidParameter(f"delta must lie in (0, 1/(8q')) = (0, {cap})")
    t_max = d / (16 * n)
    eta = d / (4 * n + 2 * d)
    return RegionSpec(n, q, qd, d, t_max, eta, 1 + d / (8 * n), 1 + t_max)


def _band_bins(n: int, domain_half: float, band) -> np.ndarray:
    lo, hi = band
    freqs = np.fft.fftfreq(n, d=2 * domain_half / n)
    nyq = n / (4 * domain_half)
    if not lo <= hi or hi > nyq or lo < 0:
        raise InvalidBand(f"band {band} must satisfy 0 <= lo <= hi <= Nyquist {nyq}")
    bins = np.flatnonzero((np.abs(freqs) >= lo) & (np.abs(freqs) <= hi) & (np.abs(freqs) < nyq))
    if bins.size == 0:
        raise InvalidBand(f"band {band} contains no lattice frequency")
    return bins


def band_bins(n: int, domain_half: float, band) -> np.ndarray:
    """FFT bin indices with ``lo <= |xi| <= hi`` (Nyquist bin excluded)."""
    return _band_bins(n, domain_half, band)


def random_bandlimited(seed, band, norm_p=2.0, n: int = 1024, domain_half: float = 8.0,
                       rng: np.random.Generator | None = None) -> LineFunction:
    """Real function with Gaussian spectral coefficients on ``lo <= |xi| <= hi``.

    The spectrum is Hermitian so the samples are real; the result is scaled
    to unit ``L^norm_p`` norm on the whole periodic domain.  Passing ``rng``
    draws from that stream instead of a fresh one seeded by ``seed``.
    """
    bins = _band_bins(n, domain_half, band)
    rng = np.random.default_rng(seed) if rng is None else rng
    freqs = np.fft.fftfreq(n)
    pos = bins[freqs[bins] > 0]
    spec = np.zeros(n, dtype=complex)
    spec[pos] = rng.standard_normal(pos.size) + 1j * rng.standard_normal(pos.size)
    spec[(-pos) % n] = np.conj(spec[pos])
    if np.any(freqs[bins] == 0):
        spec[0] = rng.standard_normal()
    v = np.fft.ifft(spec).real
    f = LineFunction(v, domain_half)
    return f.with_samples(v / f.lp_norm(norm_p))


def _aligned(f: LineFunction, p1: float, p2: float) -> LineFunction:
    # equality case of Hoelder for the pointwise product
    v = np.sign(f.samples) * np.abs(f.samples) ** (p1 / p2)
    g = f.with_samples(v)
    return g.with_samples(v / g.lp_norm(p2))


def probe_operator_norm(T, p1: float, p2: float, p: float, probes: int = 32, seed: int = 0,
                        band=(0.125, 16.0), n: int = 1024, domain_half: float = 8.0,
                        return_trace: bool = False):
    """Largest ``||T(f, g)||_p / (||f||_p1 ||g||_p2)`` over seeded random pairs.

    Each probe draws ``f`` and ``g`` from one generator stream (so the first
    ``k`` probes do not depend on the total count) and tests both ``(f, g)``
    and the Hoelder-aligned pair ``(f, sign f |f|**(p1/p2))``.  ``T`` maps two
    :class:`LineFunction` objects to a LineFunction or a BilinearResult.
    Norms are taken over the whole periodic domain.
    """
    if probes < 16:
        raise InvalidParameter("need at least 16 probes")
    for v in (p1, p2):
        if not 1 < v < np.inf:
            raise InvalidTriple("p1 and p2 must lie in (1, inf)")
    if abs(1.0 / p - 1.0 / p1 - 1.0 / p2) > 1e-12:
        raise InvalidTriple(f"1/p != 1/p1 + 1/p2 for ({p1}, {p2}, {p})")
    rng = np.random.default_rng(seed)
    best = 0.0
    trace = []
    for _ in range(probes):
        f = random_bandlimited(None, band, p1, n, domain_half, rng=rng)
        g = random_bandlimited(None, band, p2, n, domain_half, rng=rng)
        for gg in (g, _aligned(f, p1, p2)):
            out = T(f, gg)
            if isinstance(out, BilinearResult):
                out = out.output
            ratio = out.lp_norm(p) / (f.lp_norm(p1) * gg.lp_norm(p2))
            best = max(best, float(ratio))
        trace.append(best)
    return (best, trace) if return_trace else best
