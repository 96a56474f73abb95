"""Run configuration: flat ``key = value`` files with ``#`` comments."""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction

from .exceptions import ConfigError


@dataclass(frozen=True)
class RunConfig:
    """Knobs shared by the CLI pipelines.

    ``grid_exponent`` sets the spatial sampling of ``K0``: ``N = 2**e``
    points across ``[-2, 2]``, i.e. step ``2**(2 - e)``, whose Nyquist
    frequency ``N/8`` bounds the reachable shells by ``2**(j+1) < N/8``.
    """

    n_theta: int = 2048
    grid_exponent: int = 10
    lambda_max: int = 3
    M: int = 8
    j_list: tuple = (3, 4, 5)
    delta_override: float | None = None
    q: float = float("inf")
    seed: int = 0
    probes: int = 32
    output_dir: str = "out"
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)

    @property
    def spatial_step(self) -> float:
        return 2.0 ** (2 - self.grid_exponent)

    @property
    def nyquist(self) -> float:
        return 2.0 ** self.grid_exponent / 8

    def validate(self) -> "RunConfig":
        for name in ("n_theta", "grid_exponent", "probes", "workers"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.lambda_max < 0:
            raise ConfigError("lambda_max must be >= 0")
        if not self.j_list:
            raise ConfigError("j_list is empty")
        for j in self.j_list:
            if 2.0 ** (j + 1) >= self.nyquist:
                raise ConfigError(f"j={j} needs 2**(j+1) < Nyquist {self.nyquist}; "
                                  f"raise grid_exponent")
        if self.delta_override is not None:
            qd = Fraction(1) if self.q == float("inf") else Fraction(self.q) / (Fraction(self.q) - 1)
            if not 0 < Fraction(self.delta_override) < 1 / (8 * qd):
                raise ConfigError("delta_override must lie in (0, 1/(8q'))")
        return self

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _coerce(name: str, raw: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ConfigError(f"unknown config key {name!r}")
    raw = raw.strip()
    try:
        if name == "j_list":
            return tuple(int(v) for v in raw.replace(",", " ").split())
        if name == "delta_override":
            return None if raw.lower() in ("", "none") else float(Fraction(raw))
        if name == "q":
            return float("inf") if raw.lower() in ("inf", "infinity") else float(raw)
        if name == "output_dir":
            return raw
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse_config(text: str) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = line.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), raw)
    return RunConfig(**values)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
