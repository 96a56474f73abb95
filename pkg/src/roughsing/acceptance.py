"""The acceptance suite, shared by ``roughsing verify`` and the test-suite.

Each check returns a :class:`CheckResult`; a check passes when every
measured quantity meets its threshold and the runtime stays in budget.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bilinear import (LineFunction, PrecomputedMultiplier, apply_multiplier, apply_T_j,
                       calderon_commutator, calderon_via_T_omega, direct_pv_quadrature,
                       fft_hilbert, preset_function, resolvable_k)
from .fit import linear_fit
from .kernel import (K0Transform, Lattice, ShellSymbol, compute_K0_hat, compute_m_j0,
                     cz_certificate, envelope_check)
from .probe import band_bins, fit_decay, interpolation_region, probe_operator_norm
from .sphere import builtin_omega
from .split import build_split_report, reconstruct_part
from .wavelet import analysis_lattice, analyze, build_wavelet_pair, coeff_decay_report, synthesize


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: dict
    threshold: dict
    runtime: float
    budget: float
    detail: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        parts = ", ".join(f"{k}={_fmt(v)} ({self.threshold[k]})" if k in self.threshold
                          else f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{self.status}] {self.name}: {parts}; runtime {self.runtime:.1f}s / {self.budget:g}s"

    def to_dict(self) -> dict:
        return {"check_name": self.name, "status": self.status, "measured": self.measured,
                "threshold": self.threshold, "runtime": self.runtime, "budget": self.budget,
                "detail": self.detail}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


class Workspace:
    """Caches the expensive shared pieces (wavelet pair and coefficient sets)."""

    def __init__(self, n_theta: int = 2048, M: int = 8, lambda_max: int = 3, seed: int = 0,
                 probes: int = 32):
        self.n_theta = n_theta
        self.M = M
        self.lambda_max = lambda_max
        self.seed = seed
        self.probes = probes
        self._coeffs = {}
        self._wp = None

    def omega(self, kind: str):
        return builtin_omega(kind, self.n_theta)

    @property
    def wp(self):
        if self._wp is None:
            self._wp = build_wavelet_pair(self.M, 12)
        return self._wp

    def coefficients(self, kind: str, j: int):
        key = (kind, j)
        if key not in self._coeffs:
            lat = analysis_lattice(j, self.lambda_max)
            m = compute_m_j0(compute_K0_hat(self.omega(kind), lat, spatial_step=2.0 ** -7), j)
            c = analyze(m, self.wp, self.lambda_max)
            self._coeffs[key] = (m.norm_l2 ** 2, c, lat)
        return self._coeffs[key]


def _rel(a, b, p=2):
    return float(np.linalg.norm((a - b).ravel(), p) / np.linalg.norm(b.ravel(), p))


def check_multiplier_identity(ws: Workspace) -> CheckResult:
    t0 = time.perf_counter()
    pairs = [("gauss", "gauss_shift"), ("bump", "wave"), ("gauss_wide", "wave")]
    errs = {}
    for a, b in pairs:
        f, g = preset_function(a, 2048, 16.0), preset_function(b, 2048, 16.0)
        out = apply_multiplier(1.0, f, g, spectral_tol=0.0).output.samples
        errs[f"{a}*{b}"] = _rel(out, f.samples * g.samples)
    worst = max(errs.values())
    rt = time.perf_counter() - t0
    return CheckResult("1 multiplier identity", worst <= 1e-10 and rt < 5,
                       {"rel_l2": worst}, {"rel_l2": "<= 1e-10"}, rt, 5, {"pairs": errs})


def check_oracle_agreement(ws: Workspace) -> CheckResult:
    t0 = time.perf_counter()
    om = ws.omega("cos_k")
    f = preset_function("gauss", 512, 16.0)
    g = preset_function("gauss_shift", 512, 16.0)
    xs = np.linspace(-4.0, 4.0, 64)
    oracle = direct_pv_quadrature(om, f, g, xs)
    k0 = K0Transform(om, 2.0 ** -8)

    def shell_total(js):
        total = np.zeros(f.n, dtype=complex)
        for j in js:
            total += apply_T_j(ShellSymbol(k0, j), None, f, g).output.samples
        return f.with_samples(total).interpolant()(xs)

    approx = shell_total(range(1, 6))
    disc = float(np.abs(approx - oracle).sum() / np.abs(oracle).sum())
    # every shell down to the frequency resolution, as a diagnostic
    full = shell_total(range(-12, 6))
    disc_full = float(np.abs(full - oracle).sum() / np.abs(oracle).sum())
    rt = time.perf_counter() - t0
    return CheckResult("2 oracle agreement", disc <= 0.05 and rt < 300,
                       {"rel_l1_j1to5": disc}, {"rel_l1_j1to5": "<= 0.05"}, rt, 300,
                       {"rel_l1_j_minus12_to5": disc_full,
                        "share_of_j1to5": float(np.abs(approx).sum() / np.abs(oracle).sum())})


def check_envelope(ws: Workspace) -> CheckResult:
    t0 = time.perf_counter()
    lat = Lattice(1.0 / 8, 512)
    measured, detail = {}, {}
    ok = True
    for kind in ("sign_odd", "cos_k", "commutator"):
        om = ws.omega(kind)
        qd = 1.0  # bounded profiles: q = inf
        rep = envelope_check(compute_K0_hat(om, lat), 1.0 / (2 * qd))
        measured[f"{kind}_holds"] = rep.holds_fraction
        detail[kind] = {"C": rep.constant, "C_deriv": rep.derivative_constant,
                        "value_at_zero": rep.value_at_zero, "C_inner": rep.constant_inner,
                        "C_outer": rep.constant_outer}
        ok &= bool(np.isfinite(rep.constant) and rep.holds_fraction == 1.0)
    rt = time.perf_counter() - t0
    return CheckResult("3 K0 envelope", ok and rt < 360, measured,
                       {k: "== 1" for k in measured}, rt, 360, detail)


def check_symbol_decay(ws: Workspace) -> CheckResult:
    t0 = time.perf_counter()
    om = ws.omega("sign_odd")
    js = [3, 4, 5]
    norms = []
    for j in js:
        lat = Lattice.covering(2.0 ** (j + 1), 2.0 ** (j - 6))
        norms.append(compute_m_j0(compute_K0_hat(om, lat), j).norm_inf)
    slope = linear_fit(js, np.log2(norms))[0]
    rt = time.perf_counter() - t0
    return CheckResult("4 symbol decay", slope <= -0.25 and rt < 180, {"slope": slope},
                       {"slope": "<= -0.25"}, rt, 180, {"norm_inf": dict(zip(js, norms))})


def check_wavelet_decay(ws: Workspace) -> CheckResult:
    t0 = time.perf_counter()
    _, c, _ = ws.coefficients("cos_k", 4)
    rep = coeff_decay_report(c)
    steps = np.diff(np.log2(rep.max_abs))
    rt = time.perf_counter() - t0
    target = -(ws.M + 1 + 1) + 1
    return CheckResult("5 wavelet coefficient decay", rep.slope <= target and rt < 600,
                       {"lambda_slope": rep.slope}, {"lambda_slope": f"<= {target}"}, rt, 600,
                       {"max_abs": dict(zip(rep.lambdas, rep.max_abs)),
                        "steepest_step": float(steps.min())})


def check_parseval(ws: Workspace) -> CheckResult:
    t0 = time.perf_counter()
    ratios = {}
    for kind in ("sign_odd", "cos_k", "commutator", "bump_pair"):
        norm2, c, _ = ws.coefficients(kind, 4)
        ratios[kind] = c.energy() / norm2
    ok = all(0.9 <= r <= 1.05 for r in ratios.values())
    rt = time.perf_counter() - t0
    return CheckResult("6 Parseval/Bessel", ok and rt < 600,
                       {"min_ratio": min(ratios.values()), "max_ratio": max(ratios.values())},
                       {"min_ratio": ">= 0.9", "max_ratio": "<= 1.05"}, rt, 600, {"ratios": ratios})


def check_combinatorics(ws: Workspace) -> CheckResult:
    t0 = time.perf_counter()
    _, c, lat = ws.coefficients("sign_odd", 4)
    rep = build_split_report(c, ws.wp, 4, Fraction(1, 16))
    failed = rep.failed_certs()
    target = Lattice(lat.spacing * 4, lat.n // 4)
    full = synthesize(c, ws.wp, target).values
    parts = sum(reconstruct_part(c, rep.part(label), ws.wp, target).values for label in (1, 2, 3))
    resid = float(np.abs(parts - full).max() / np.abs(full).max())
    rt = time.perf_counter() - t0
    return CheckResult("7 combinatorial certificates", not failed and resid <= 1e-12 and rt < 300,
                       {"failed_certificates": len(failed), "resynthesis": resid},
                       {"failed_certificates": "== 0", "resynthesis": "<= 1e-12"}, rt, 300, rep.summary())


def check_operator_decay(ws: Workspace) -> CheckResult:
    t0 = time.perf_counter()
    om = ws.omega("sign_odd")
    k0 = K0Transform(om, 2.0 ** -8)
    n, half, band = 1024, 8.0, (0.125, 16.0)
    tmpl = LineFunction(np.zeros(n), half)
    bins = band_bins(n, half, band)
    rows, traces = [], {}
    for j in (3, 4, 5):
        sym = ShellSymbol(k0, j)
        op = PrecomputedMultiplier(sym, tmpl, bins, resolvable_k(sym, tmpl))
        val, trace = probe_operator_norm(op, 2.0, 2.0, 1.0, ws.probes, ws.seed, band, n, half,
                                         return_trace=True)
        rows.append({"j": j, "metric": "op_l2l2l1", "value": val})
        traces[j] = bool(np.all(np.diff(trace) >= 0))
    fit = fit_decay(rows)[0]
    rt = time.perf_counter() - t0
    return CheckResult("8 operator-norm decay", fit["slope"] <= -0.02 and all(traces.values()) and rt < 900,
                       {"slope": fit["slope"]}, {"slope": "<= -0.02"}, rt, 900,
                       {"values": {r["j"]: r["value"] for r in rows}, "monotone_traces": traces})


def check_commutator(ws: Workspace) -> CheckResult:
    t0 = time.perf_counter()
    f = preset_function("bump", 2048, 32.0)
    one = f.with_samples(np.ones(f.n))
    mid = f.middle()
    c = calderon_commutator(one, f).samples[mid]
    ref = np.pi * fft_hilbert(f).samples[mid]
    hil = _rel(c, ref)
    a = preset_function("wave", 512, 16.0)
    h = preset_function("gauss", 512, 16.0)
    k_route = calderon_commutator(a, h).samples[h.middle()]
    t_route = calderon_via_T_omega(ws.omega("commutator"), a, h).samples[h.middle()]
    two = _rel(t_route, k_route, 1)
    rt = time.perf_counter() - t0
    return CheckResult("9 commutator corollary", hil <= 0.02 and two <= 0.05 and rt < 120,
                       {"hilbert_rel_l2": hil, "routes_rel_l1": two},
                       {"hilbert_rel_l2": "<= 0.02", "routes_rel_l1": "<= 0.05"}, rt, 120)


def check_region(ws: Workspace) -> CheckResult:
    t0 = time.perf_counter()
    r = interpolation_region(1, np.inf)
    d = Fraction(1, 16)
    exact = (r.delta == d and r.eta_max == d / (4 + 2 * d) and r.t_max == d / 16
             and r.inv_p_min - 1 == d / 8)
    qs = [2, 4, 8, np.inf]
    tm = [interpolation_region(1, q).t_max for q in qs]
    monotone = all(a <= b for a, b in zip(tm, tm[1:]))
    scale = {str(q): str(interpolation_region(1, q).area * interpolation_region(1, q).q_dual ** 2)
             for q in qs}
    rt = time.perf_counter() - t0
    return CheckResult("10 region calculator", exact and monotone and len(set(scale.values())) == 1 and rt < 1,
                       {"exact": exact, "monotone": monotone}, {"exact": "== True", "monotone": "== True"}, rt, 1,
                       {**r.to_dict(), "t_max_by_q": [str(v) for v in tm], "area_times_qdual_sq": scale})


def check_cz(ws: Workspace) -> CheckResult:
    t0 = time.perf_counter()
    om = ws.omega("sign_odd")
    js = [2, 4, 6]
    certs = [cz_certificate(om, j, 0.5, 500, seed=ws.seed) for j in js]
    vals = [c.fitted_A_smooth for c in certs]
    slope = linear_fit(js, np.log2(vals))[0]
    rt = time.perf_counter() - t0
    return CheckResult("11 CZ certificate", slope <= 0.6 and rt < 180, {"slope": slope},
                       {"slope": "<= 0.6"}, rt, 180,
                       {"fitted_A_smooth": dict(zip(js, vals)),
                        "fitted_A": dict(zip(js, [c.fitted_A for c in certs]))})


CHECKS = {
    "multiplier_identity": check_multiplier_identity,
    "oracle_agreement": check_oracle_agreement,
    "envelope": check_envelope,
    "symbol_decay": check_symbol_decay,
    "wavelet_decay": check_wavelet_decay,
    "parseval": check_parseval,
    "combinatorics": check_combinatorics,
    "operator_decay": check_operator_decay,
    "commutator": check_commutator,
    "region": check_region,
    "cz_certificate": check_cz,
}


def run_all(ws: Workspace | None = None, only=None, echo=None) -> list[CheckResult]:
    ws = ws or Workspace()
    out = []
    for name, fn in CHECKS.items():
        if only and name not in only:
            continue
        res = fn(ws)
        out.append(res)
        if echo:
            echo(res.line())
    return out
