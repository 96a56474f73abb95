"""Command-line front end: ``roughsing <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import acceptance
from .bilinear import (LineFunction, PRESETS, PrecomputedMultiplier, apply_T_j,
                       direct_pv_quadrature, preset_function, resolvable_k)
from .config import RunConfig, load_config
from .exceptions import RoughSingError
from .kernel import K0Transform, Lattice, ShellSymbol, compute_K0_hat, compute_m_j0, cz_certificate
from .probe import DecayReport, band_bins, interpolation_region, probe_operator_norm
from .sphere import BUILTIN_KINDS, builtin_omega
from .split import build_split_report, reconstruct_part
from .wavelet import LABELS, analysis_lattice, analyze, build_wavelet_pair, coeff_decay_report


def _num(v) -> str:
    # shortest round-trip decimal
    return repr(float(v))


def _write_csv(path: str, header, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# generated {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (str, int, np.integer)) else _num(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _write_json(path: str, obj) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _omega(cfg: RunConfig, kind: str, args=None):
    kw = {}
    if args is not None:
        for name in ("k", "theta0", "width"):
            if getattr(args, name, None) is not None:
                kw[name] = getattr(args, name)
    return builtin_omega(kind, cfg.n_theta, **kw)


def _pmap(cfg: RunConfig, fn, items):
    if cfg.workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(cfg.workers) as pool:
        return list(pool.map(fn, items))


def cmd_omega(cfg, args):
    om = _omega(cfg, args.kind, args)
    path = os.path.join(cfg.output_dir, f"omega_{args.kind}.csv")
    _write_csv(path, ["theta", "value"], zip(om.theta, om.values))
    print(path)
    return 0


def cmd_symbol(cfg, args):
    om = _omega(cfg, args.omega, args)

    def one(j):
        if args.spacing:
            spacing = args.spacing
        elif args.lambda_max is not None:
            spacing = 2.0 ** (-args.lambda_max - 2)
        else:
            spacing = 2.0 ** (j - 6)
        lat = Lattice.covering(2.0 ** (j + 1), spacing)
        m = compute_m_j0(compute_K0_hat(om, lat, spatial_step=cfg.spatial_step), j)
        ax = m.axis
        i1, i2 = np.nonzero(m.values)
        path = os.path.join(cfg.output_dir, f"symbol_{args.omega}_j{j}.csv")
        vals = m.values[i1, i2]
        _write_csv(path, ["xi1", "xi2", "re", "im"], zip(ax[i1], ax[i2], vals.real, vals.imag))
        return j, m.norm_inf, m.norm_l2

    rows = _pmap(cfg, one, list(cfg.j_list))
    path = os.path.join(cfg.output_dir, f"symbol_{args.omega}_summary.csv")
    _write_csv(path, ["j", "norm_inf", "norm_l2"], rows)
    print(path)
    return 0


def cmd_czcheck(cfg, args):
    om = _omega(cfg, args.omega, args)
    certs = _pmap(cfg, lambda j: cz_certificate(om, j, args.eps, args.samples, cfg.seed).to_dict(),
                  list(cfg.j_list))
    path = os.path.join(cfg.output_dir, f"czcheck_{args.omega}.json")
    _write_json(path, {"omega": args.omega, "seed": cfg.seed, "certificates": certs})
    print(path)
    return 0


def cmd_apply(cfg, args):
    om = _omega(cfg, args.omega, args)
    f = preset_function(args.f, args.n, args.half)
    g = preset_function(args.g, args.n, args.half)
    if args.oracle:
        mid = f.middle()
        vals = np.zeros(f.n, dtype=complex)
        vals[mid] = direct_pv_quadrature(om, f, g, f.x[mid])
        out = f.with_samples(vals)
        path_kind, meta = "quadrature", {}
    else:
        res = apply_T_j(ShellSymbol(K0Transform(om, cfg.spatial_step), args.j), None, f, g)
        out, path_kind, meta = res.output, res.path, res.meta
    stem = os.path.join(cfg.output_dir, f"apply_{args.omega}_j{args.j}_{path_kind}")
    _write_csv(stem + ".csv", ["x", "re", "im"], zip(out.x, out.samples.real, np.imag(out.samples)))
    _write_json(stem + ".json", {"l1": out.lp_norm(1, middle=True), "l2": out.lp_norm(2, middle=True),
                                 "path": path_kind, **meta})
    print(stem + ".csv")
    return 0


def _coeffs(cfg, om, j, wp):
    lat = analysis_lattice(j, cfg.lambda_max)
    m = compute_m_j0(compute_K0_hat(om, lat, spatial_step=min(cfg.spatial_step, 2.0 ** -7)), j)
    return m, analyze(m, wp, cfg.lambda_max), lat


def cmd_wavelet(cfg, args):
    om = _omega(cfg, args.omega, args)
    wp = build_wavelet_pair(cfg.M, 12)
    sets = []
    for j in cfg.j_list:
        m, c, _ = _coeffs(cfg, om, j, wp)
        sets.append(c)
        path = os.path.join(cfg.output_dir, f"wavelet_{args.omega}_j{j}.csv")
        _write_csv(path, ["lambda", "G1", "G2", "mu1", "mu2", "abs_a"],
                   zip(c.lam, (LABELS[v] for v in c.g1), (LABELS[v] for v in c.g2),
                       c.mu1, c.mu2, np.abs(c.a)))
    rep = coeff_decay_report(sets if len(sets) > 1 else sets[0], cfg.delta_override)
    path = os.path.join(cfg.output_dir, f"wavelet_{args.omega}_decay.json")
    _write_json(path, {"M": cfg.M, "lambda_max": cfg.lambda_max, **rep.to_dict(),
                       "coeff_energy": {c.source_j: c.energy() for c in sets}})
    print(path)
    return 0


def cmd_split(cfg, args):
    om = _omega(cfg, args.omega, args)
    wp = build_wavelet_pair(cfg.M, 12)
    m, c, lat = _coeffs(cfg, om, args.j, wp)
    delta = Fraction(cfg.delta_override) if cfg.delta_override else Fraction(1, 16)
    rep = build_split_report(c, wp, args.j, delta)
    path = os.path.join(cfg.output_dir, f"split_{args.omega}_j{args.j}.json")
    _write_json(path, {**rep.summary(), "failed_certificates": rep.failed_certs()})
    if args.parts:
        target = Lattice(lat.spacing * 4, lat.n // 4)
        ax = target.axis
        for label in (1, 2, 3):
            part = reconstruct_part(c, rep.part(label), wp, target)
            i1, i2 = np.nonzero(part.values)
            v = part.values[i1, i2]
            _write_csv(os.path.join(cfg.output_dir, f"split_{args.omega}_j{args.j}_D{label}.csv"),
                       ["xi1", "xi2", "re", "im"], zip(ax[i1], ax[i2], v.real, v.imag))
    print(path)
    return 0 if not rep.failed_certs() else 1


def cmd_probe(cfg, args):
    om = _omega(cfg, args.omega, args)
    p = 1.0 / (1.0 / args.p1 + 1.0 / args.p2)
    n, half, band = 1024, 8.0, (0.125, 16.0)
    tmpl = LineFunction(np.zeros(n), half)
    bins = band_bins(n, half, band)
    k0 = K0Transform(om, cfg.spatial_step)
    metric = "op_l2l2l1" if (args.p1, args.p2) == (2.0, 2.0) else "op_p1p2p"

    def one(j):
        sym = ShellSymbol(k0, j)
        op = PrecomputedMultiplier(sym, tmpl, bins, resolvable_k(sym, tmpl))
        return j, probe_operator_norm(op, args.p1, args.p2, p, cfg.probes, cfg.seed, band, n, half)

    report = DecayReport()
    for j, v in _pmap(cfg, one, list(cfg.j_list)):
        report.add(j, metric, v)
    fits = report.refit() if len(report.rows) >= 3 else []
    stem = os.path.join(cfg.output_dir, f"probe_{args.omega}")
    _write_csv(stem + ".csv", ["j", "metric", "value"],
               ((r["j"], r["metric"], r["value"]) for r in report.rows))
    _write_json(stem + "_fits.json", {"p1": args.p1, "p2": args.p2, "p": p, "fits": fits})
    print(stem + ".csv")
    return 0


def cmd_region(cfg, args):
    q = np.inf if str(args.q).lower() in ("inf", "infinity") else Fraction(args.q)
    reg = interpolation_region(args.n, q, cfg.delta_override)
    path = os.path.join(cfg.output_dir, "region.json")
    _write_json(path, reg.to_dict())
    print(path)
    return 0


def cmd_verify(cfg, args):
    names = list(acceptance.CHECKS)
    selected = args.only.split(",") if args.only else names
    unknown = [s for s in selected if s not in acceptance.CHECKS]
    if unknown:
        raise RoughSingError(f"unknown checks: {unknown}; available: {names}")
    if args.dry_run:
        for s in selected:
            print(f"planned: {s}")
        return 0
    ws = acceptance.Workspace(cfg.n_theta, cfg.M, cfg.lambda_max, cfg.seed, cfg.probes)
    results = acceptance.run_all(ws, only=selected, echo=print)
    path = os.path.join(cfg.output_dir, "verify_summary.json")
    _write_json(path, [r.to_dict() for r in results])
    print(path)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--workers", type=int)

    jlist = argparse.ArgumentParser(add_help=False)
    jlist.add_argument("--j", dest="j_list", type=lambda s: tuple(int(v) for v in s.split(",")),
                       help="comma-separated shell indices")

    shape = argparse.ArgumentParser(add_help=False)
    shape.add_argument("--k", type=int, help="cos_k frequency")
    shape.add_argument("--theta0", type=float, help="bump_pair centre")
    shape.add_argument("--width", type=float, help="bump_pair half-width")

    ap = argparse.ArgumentParser(prog="roughsing", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("omega", parents=[common, shape], help="write an angular profile")
    p.add_argument("--kind", choices=BUILTIN_KINDS, required=True)
    p.add_argument("--ntheta", dest="n_theta", type=int)
    p.set_defaults(func=cmd_omega)

    p = sub.add_parser("symbol", parents=[common, jlist, shape], help="shell symbols m_j0")
    p.add_argument("--omega", choices=BUILTIN_KINDS, required=True)
    p.add_argument("--lambda-max", dest="lambda_max", type=int)
    p.add_argument("--spacing", type=float, help="lattice step (default 2**(-lambda_max-2) if given, else 2**(j-6))")
    p.set_defaults(func=cmd_symbol)

    p = sub.add_parser("czcheck", parents=[common, jlist, shape], help="kernel bound certificate")
    p.add_argument("--omega", choices=BUILTIN_KINDS, default="sign_odd")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=500)
    p.set_defaults(func=cmd_czcheck)

    p = sub.add_parser("apply", parents=[common, shape], help="apply T_j or the quadrature oracle")
    p.add_argument("--omega", choices=BUILTIN_KINDS, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--f", choices=PRESETS, default="gauss")
    p.add_argument("--g", choices=PRESETS, default="gauss_shift")
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--half", type=float, default=16.0)
    p.add_argument("--oracle", action="store_true")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("wavelet", parents=[common, jlist, shape], help="wavelet coefficients")
    p.add_argument("--omega", choices=BUILTIN_KINDS, required=True)
    p.add_argument("--M", type=int)
    p.add_argument("--lambda-max", dest="lambda_max", type=int)
    p.set_defaults(func=cmd_wavelet)

    p = sub.add_parser("split", parents=[common, shape], help="diagonal/off-diagonal splitting")
    p.add_argument("--omega", choices=BUILTIN_KINDS, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--M", type=int)
    p.add_argument("--lambda-max", dest="lambda_max", type=int)
    p.add_argument("--parts", action="store_true", help="also write D1/D2/D3 symbol CSVs")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("probe", parents=[common, jlist, shape], help="operator-norm probing")
    p.add_argument("--omega", choices=BUILTIN_KINDS, required=True)
    p.add_argument("--p1", type=float, default=2.0)
    p.add_argument("--p2", type=float, default=2.0)
    p.add_argument("--probes", type=int)
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("region", parents=[common], help="interpolation region")
    p.add_argument("--q", default="inf")
    p.add_argument("--n", type=int, default=1)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--only", help="comma-separated check names")
    p.set_defaults(func=cmd_verify)
    return ap


_CONFIG_KEYS = ("n_theta", "lambda_max", "M", "j_list", "seed", "probes", "output_dir", "workers")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = cfg.with_overrides(**{k: getattr(args, k, None) for k in _CONFIG_KEYS})
        cfg.validate()
        return args.func(cfg, args)
    except (RoughSingError, OSError) as exc:
        print(f"roughsing: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
