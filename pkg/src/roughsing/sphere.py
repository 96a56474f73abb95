"""Angular profiles on the unit circle.

The rough kernel is ``Omega((y, z)/|(y, z)|) / |(y, z)|**2`` in the plane, so in
dimension one the whole roughness lives in a function on S^1.  Profiles are
stored as samples on a uniform angular grid; the measure is ``dtheta`` (total
mass 2*pi).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidExponent, InvalidGrid, InvalidParameter

MIN_SAMPLES = 64
DEFAULT_NTHETA = 2048


def theta_grid(n: int) -> np.ndarray:
    """Uniform angles ``2*pi*i/n`` for ``i = 0..n-1``."""
    if n < MIN_SAMPLES or n % 2:
        raise InvalidGrid(f"need an even number of samples >= {MIN_SAMPLES}, got {n}")
    return 2.0 * np.pi * np.arange(n) / n


@dataclass(frozen=True)
class SphericalFunction:
    """Samples of a mean-zero profile Omega on S^1.

    Parameters
    ----------
    theta : ndarray
        Uniform angles in ``[0, 2*pi)``.
    values : ndarray
        ``Omega(theta_i)``.
    q : float
        Integrability exponent the profile is advertised with (``inf`` for
        bounded profiles).  Only used to pick defaults such as delta.
    name : str
        Free-form label carried into reports.
    """

    theta: np.ndarray
    values: np.ndarray
    q: float = np.inf
    name: str = "custom"
    _slopes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        values = np.asarray(self.values, dtype=float)
        n = theta.size
        if values.shape != theta.shape:
            raise InvalidGrid("theta and values must have the same shape")
        if not np.allclose(theta, theta_grid(n), rtol=0, atol=1e-12):
            raise InvalidGrid("theta samples must be uniform on [0, 2*pi)")
        if self.q < 1:
            raise InvalidExponent(f"q must be >= 1, got {self.q}")
        theta.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_slopes", np.diff(np.append(values, values[0])))

    @property
    def n(self) -> int:
        return self.theta.size

    @property
    def step(self) -> float:
        return 2.0 * np.pi / self.n

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def mean(self) -> float:
        """Trapezoid mean of the profile (periodic rule, so a plain average)."""
        return float(np.mean(self.values))

    def integral(self) -> float:
        return float(np.sum(self.values) * self.step)

    def __call__(self, angle) -> np.ndarray:
        """Periodic linear interpolation of the samples at arbitrary angles."""
        s = np.mod(np.asarray(angle, dtype=float), 2.0 * np.pi) / self.step
        i = np.floor(s).astype(np.int64)
        frac = s - i
        i %= self.n
        return self.values[i] + frac * self._slopes[i]

    def is_odd(self, atol: float = 1e-12) -> bool:
        half = self.n // 2
        return bool(np.allclose(np.roll(self.values, -half), -self.values, rtol=0, atol=atol))


def project_mean_zero(raw, q: float = np.inf, name: str = "custom") -> SphericalFunction:
    """Subtract the quadrature mean from raw samples on the uniform grid."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 1 or raw.size < MIN_SAMPLES:
        raise InvalidGrid(f"need at least {MIN_SAMPLES} samples, got {raw.size}")
    theta = theta_grid(raw.size)
    values = raw - raw.mean()
    # a second pass removes the rounding residue of the first
    values -= values.mean()
    return SphericalFunction(theta, values, q=q, name=name)


def lq_norm(omega, q: float) -> float:
    """``(int |Omega|^q dtheta)^(1/q)`` by the periodic trapezoid rule.

    ``omega`` may be a :class:`SphericalFunction` or a raw sample array on the
    uniform grid (useful for norms of profiles that are not mean zero).
    """
    if q < 1:
        raise InvalidExponent(f"q must be >= 1, got {q}")
    values = omega.values if isinstance(omega, SphericalFunction) else np.asarray(omega, float)
    if np.isinf(q):
        return float(np.max(np.abs(values)))
    step = 2.0 * np.pi / values.size
    return float((np.sum(np.abs(values) ** q) * step) ** (1.0 / q))


def _smooth_bump(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _antisymmetrize(first_half: np.ndarray) -> np.ndarray:
    return np.concatenate([first_half, -first_half])


BUILTIN_KINDS = ("sign_odd", "cos_k", "commutator", "bump_pair")


def builtin_omega(kind: str, ntheta: int = DEFAULT_NTHETA, *, k: int = 1,
                  theta0: float = np.pi / 4, width: float = 0.1) -> SphericalFunction:
    """Construct one of the built-in mean-zero profiles.

    ``sign_odd``
        ``sign(theta - pi)`` with the value 0 on the jump points, so the grid
        function is exactly odd.
    ``cos_k``
        ``cos(k theta)``, ``k >= 1``.
    ``commutator``
        The profile of the Calderon commutator kernel
        ``(e(z) - e(z - y)) / y**2`` restricted to the circle, where ``e`` is the
        Heaviside step with ``e(0) = 1/2``.
    ``bump_pair``
        Unit-mass smooth bump of half-width ``width`` at ``theta0`` minus its
        antipodal copy.
    """
    theta = theta_grid(ntheta)
    half = ntheta // 2
    if kind == "sign_odd":
        values = np.sign(theta - np.pi)
        values[0] = 0.0
        return project_mean_zero(values, q=np.inf, name="sign_odd")
    if kind == "cos_k":
        if int(k) != k or k < 1:
            raise InvalidParameter(f"cos_k needs an integer k >= 1, got {k}")
        return project_mean_zero(np.cos(k * theta), q=np.inf, name=f"cos_k({int(k)})")
    if kind == "commutator":
        t = theta[:half]
        y, z = np.cos(t), np.sin(t)
        # snap rounding noise so the steps see exact zeros at the breakpoints
        z = np.where(np.abs(z) < 1e-14, 0.0, z)
        diff = np.where(np.abs(z - y) < 1e-14, 0.0, z - y)
        step = lambda s: np.where(s > 0, 1.0, np.where(s < 0, 0.0, 0.5))  # noqa: E731
        numer = step(z) - step(diff)
        first = np.zeros_like(t)
        nz = numer != 0
        # numerator vanishes wherever cos(theta) is small, so 0 is the limit there
        first[nz] = numer[nz] / y[nz] ** 2
        return project_mean_zero(_antisymmetrize(first), q=np.inf, name="commutator")
    if kind == "bump_pair":
        if not 0 < width < np.pi / 4:
            raise InvalidParameter(f"bump_pair width must lie in (0, pi/4), got {width}")
        d = np.angle(np.exp(1j * (theta[:half] - theta0)))
        d_anti = np.angle(np.exp(1j * (theta[:half] - theta0 - np.pi)))
        first = _smooth_bump(d / width) - _smooth_bump(d_anti / width)
        # build the antipodal half explicitly so oddness is exact on the grid
        values = _antisymmetrize(first)
        mass = np.sum(np.clip(values, 0, None)) * (2 * np.pi / ntheta)
        return project_mean_zero(values / mass, q=np.inf,
                                 name=f"bump_pair({theta0:.6g},{width:.6g})")
    raise InvalidParameter(f"unknown omega kind {kind!r}; expected one of {BUILTIN_KINDS}")
