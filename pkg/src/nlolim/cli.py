"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 file I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from nlolim import __version__
from nlolim.eigensolver import (
    GridSpec,
    PotentialSpec,
    SolverError,
    solve_nonrel,
    solve_rel,
    spectrum_from_eigensystem,
)
from nlolim.hydrogenic import CURVE_COLUMNS, gamma_ratio_curve
from nlolim.io import dumps, fmt, load_json, load_spectrum, spectrum_to_dict
from nlolim.scan import DEFAULT_GRID, DEFAULT_RANGE, curve_to_csv, scan_beta, scan_gamma_max, scan_gamma_min
from nlolim.sumrules import LambdaMatrix, lambda_matrix, trk_lhs, trk_rhs_nonrel, trk_rhs_rel
from nlolim.threelevel import ThreeLevelPoint, ansatz_moments, consistency_report, constructed_rule_residuals
from nlolim.sumrules import LambdaSet
from nlolim.units import C_AU

EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 2, 3, 4


class ConfigError(ValueError):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("global options")
    g.add_argument("--c", type=float, default=argparse.SUPPRESS,
                   help=f"speed of light, atomic units (default {C_AU})")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    g.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--config", default=argparse.SUPPRESS,
                   help="JSON file of option values; command-line flags win")


DEFAULTS = {"c": C_AU, "out": None, "format": "csv", "threads": 1, "seed": 0}


def _range(text: str):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlolim", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"nlolim {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    tl = sub.add_parser("three-level", help="three-level limit scans and ansatz spectra")
    tsub = tl.add_subparsers(dest="action", required=True)

    sb = tsub.add_parser("scan-beta", help="intrinsic beta at the peak over (l00, l11)")
    sb.add_argument("--l10", type=float, default=argparse.SUPPRESS)
    sb.add_argument("--l00-range", type=_range, default=argparse.SUPPRESS)
    sb.add_argument("--l11-range", type=_range, default=argparse.SUPPRESS)
    sb.add_argument("--grid-n", type=int, default=argparse.SUPPRESS)
    sb.add_argument("--normalization", choices=("family", "published"), default=argparse.SUPPRESS)
    _common(sb)

    gm = tsub.add_parser("scan-gamma-max", help="intrinsic gamma at X=0, E=0 over (l00, l11)")
    gm.add_argument("--l10", type=float, default=argparse.SUPPRESS)
    gm.add_argument("--l00-range", type=_range, default=argparse.SUPPRESS)
    gm.add_argument("--l11-range", type=_range, default=argparse.SUPPRESS)
    gm.add_argument("--grid-n", type=int, default=argparse.SUPPRESS)
    _common(gm)

    gn = tsub.add_parser("scan-gamma-min", help="intrinsic gamma at X=1, E=0 over (l00, l10)")
    gn.add_argument("--l00-range", type=_range, default=argparse.SUPPRESS)
    gn.add_argument("--l10-range", type=_range, default=argparse.SUPPRESS)
    gn.add_argument("--grid-n", type=int, default=argparse.SUPPRESS)
    _common(gn)

    an = tsub.add_parser("ansatz", help="write the three-level ansatz spectrum as JSON")
    for name, default in (("X", None), ("E", None), ("E10", 1.0), ("l00", 1.0), ("l11", 1.0),
                          ("l10", 0.0), ("l20", 0.0)):
        an.add_argument(f"--{name}", type=float, default=argparse.SUPPRESS)
    _common(an)

    so = sub.add_parser("solve", help="finite-difference eigensolver; writes a spectrum JSON")
    so.add_argument("--states", type=int, default=argparse.SUPPRESS)
    so.add_argument("--mode", choices=("perturbative", "direct"), default=argparse.SUPPRESS)
    so.add_argument("--nonrel", action="store_true", default=argparse.SUPPRESS,
                    help="non-relativistic solve (c -> infinity)")
    so.add_argument("--n-points", type=int, default=argparse.SUPPRESS)
    so.add_argument("--x-range", type=_range, default=argparse.SUPPRESS)
    _common(so)

    sr = sub.add_parser("sumrules", help="TRK residual table for a spectrum JSON")
    sr.add_argument("spectrum_file")
    sr.add_argument("--max-index", type=int, default=argparse.SUPPRESS)
    sr.add_argument("--L", type=int, default=argparse.SUPPRESS)
    _common(sr)

    hy = sub.add_parser("hydrogenic", help="gamma of H-like ions versus Z")
    hy.add_argument("--z-max", type=int, default=argparse.SUPPRESS)
    hy.add_argument("--alpha-fs", type=float, default=argparse.SUPPRESS)
    hy.add_argument("--normalization", choices=("raw", "relativity-isolated"), default=argparse.SUPPRESS)
    hy.add_argument("--lambda-variant", choices=("trk", "literal"), default=argparse.SUPPRESS)
    _common(hy)

    co = sub.add_parser("consistency", help="closed-form versus sum-over-states report")
    co.add_argument("--samples", type=int, default=argparse.SUPPRESS)
    _common(co)
    return ap


def resolve(ns: argparse.Namespace, defaults: dict) -> dict:
    """defaults < config file < flags."""
    flags = vars(ns)
    cfg = {}
    if "config" in flags:
        try:
            cfg = load_json(flags["config"])
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {flags['config']}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    out = {**DEFAULTS, **defaults}
    out.update(cfg)
    out.update({k: v for k, v in flags.items() if k not in ("command", "action", "config")})
    return out


def _emit(text: str, out) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _reproducible(opts: dict, command: str) -> dict:
    # output location and worker count never change file contents
    return {"command": command, "version": __version__,
            "options": {k: v for k, v in sorted(opts.items()) if k not in ("out", "threads")}}


def _write_scan(table, opts, command):
    table.metadata["run_config"] = _reproducible(opts, command)
    _emit(table.to_csv() if opts["format"] == "csv" else table.to_json(), opts["out"])


def cmd_scan_beta(opts):
    t = scan_beta(opts["l10"], tuple(opts["l00_range"]), tuple(opts["l11_range"]), opts["grid_n"],
                  opts["normalization"], opts["threads"])
    _write_scan(t, opts, "three-level scan-beta")


def cmd_scan_gamma_max(opts):
    t = scan_gamma_max(opts["l10"], tuple(opts["l00_range"]), tuple(opts["l11_range"]),
                       opts["grid_n"], opts["threads"])
    _write_scan(t, opts, "three-level scan-gamma-max")


def cmd_scan_gamma_min(opts):
    t = scan_gamma_min(tuple(opts["l00_range"]), tuple(opts["l10_range"]), opts["grid_n"], opts["threads"])
    _write_scan(t, opts, "three-level scan-gamma-min")


def cmd_ansatz(opts):
    if opts.get("X") is None or opts.get("E") is None:
        raise ConfigError("ansatz needs --X and --E")
    lam = LambdaSet(opts["l00"], opts["l11"], opts["l10"], opts["l20"])
    s = ansatz_moments(ThreeLevelPoint(opts["X"], opts["E"], opts["E10"]), lam)
    doc = spectrum_to_dict(s, lam.to_matrix(offdiag_scale=0.5), lam,
                           _reproducible(opts, "three-level ansatz"))
    _emit(dumps(doc), opts["out"])


def _potential_and_grid(opts):
    cfg = opts.get("potential")
    if cfg is None:
        raise ConfigError("solve needs a potential: --config FILE with {\"kind\": ..., ...}")
    try:
        pot = PotentialSpec.from_dict(cfg)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad potential: {exc}") from exc
    g = dict(opts.get("grid") or {})
    if "x_range" in opts:
        g["x_min"], g["x_max"] = opts["x_range"]
    if "n_points" in opts:
        g["n_points"] = opts["n_points"]
    base = pot.default_grid()
    grid = GridSpec(float(g.get("x_min", base.x_min)), float(g.get("x_max", base.x_max)),
                    int(g.get("n_points", base.n_points)))
    return pot, grid


def cmd_solve(opts):
    pot, grid = _potential_and_grid(opts)
    n = int(opts["states"])
    if opts.get("nonrel"):
        es = solve_nonrel(pot, grid, n)
    else:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            es = solve_rel(pot, grid, n, c=float(opts["c"]), mode=opts["mode"])
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    s = spectrum_from_eigensystem(es)
    lam = lambda_matrix(es)
    meta = _reproducible(opts, "solve")
    meta.update({"grid": grid.to_dict(), "potential_spec": pot.to_dict(), "mode": es.mode,
                 "flags": list(es.flags), "eigenvalues": es.eigenvalues})
    _emit(dumps(spectrum_to_dict(s, lam, metadata=meta)), opts["out"])
    table = sys.stdout if opts["out"] else sys.stderr
    print("n,E_n,E_n0,lambda_nn", file=table)
    for i in range(n):
        print(f"{i},{fmt(es.eigenvalues[i])},{fmt(s.energies[i])},{fmt(lam.values[i, i])}", file=table)


def cmd_sumrules(opts):
    try:
        s, lam, lset = load_spectrum(opts["spectrum_file"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad spectrum file: {exc}") from exc
    lam = lam or LambdaMatrix.identity(s.n_levels)
    kmax = min(int(opts["max_index"]), s.n_levels - 1, lam.size - 1)
    L = int(opts["L"]) if opts.get("L") else s.n_levels
    rows = []
    for k in range(kmax + 1):
        for n in range(k + 1):
            lhs = trk_lhs(s, k, n, L)
            rn = trk_rhs_nonrel(k, n, s.mass)
            rr = trk_rhs_rel(lam, k, n, s.mass)
            rows.append({"k": k, "n": n, "L": L, "lhs": lhs, "rhs_nonrel": rn, "rhs_rel": rr,
                         "residual_nonrel": lhs - rn, "residual_rel": lhs - rr})
    doc = {"metadata": _reproducible(opts, "sumrules"), "rows": rows}
    if lset is not None:
        doc["constructed_rules"] = {f"{k},{n}": v for (k, n), v in constructed_rule_residuals(s, lset).items()}
    if opts["format"] == "json":
        _emit(dumps(doc), opts["out"])
        return
    lines = [f"# {json.dumps({'schema': 'nlolim/1', **doc['metadata']}, sort_keys=True)}",
             ",".join(rows[0])]
    lines += [",".join(fmt(v) for v in r.values()) for r in rows]
    if lset is not None:
        lines.append("# constructed three-level rules (k,n,residual)")
        lines += [f"# {k},{n},{fmt(v)}" for (k, n), v in constructed_rule_residuals(s, lset).items()]
    _emit("\n".join(lines) + "\n", opts["out"])


def cmd_hydrogenic(opts):
    cols = gamma_ratio_curve(int(opts["z_max"]), float(opts["alpha_fs"]), opts["normalization"],
                             opts["lambda_variant"])
    meta = _reproducible(opts, "hydrogenic")
    meta.update({"primary": "gamma_raw_ratio" if opts["normalization"] == "raw" else "gamma_isolated_ratio",
                 "lambda_variant": opts["lambda_variant"],
                 "multiplets": {"1": "2p j=1/2,3/2 weights 2,4", "2": "3p j=3/2,5/2 weights 4,6"},
                 "x_split": "hydrogen f(1s-2p):f(1s-3p)"})
    if opts["format"] == "json":
        _emit(dumps({"metadata": meta, "columns": {k: cols[k] for k in CURVE_COLUMNS}}), opts["out"])
    else:
        _emit(curve_to_csv(cols, meta), opts["out"])


def cmd_consistency(opts):
    rep = consistency_report(int(opts["samples"]), int(opts["seed"]))
    _emit(rep.text(), opts["out"])


COMMANDS = {
    ("three-level", "scan-beta"): (cmd_scan_beta, {"l10": 0.0, "l00_range": DEFAULT_RANGE,
                                                   "l11_range": DEFAULT_RANGE, "grid_n": DEFAULT_GRID,
                                                   "normalization": "family"}),
    ("three-level", "scan-gamma-max"): (cmd_scan_gamma_max, {"l10": 0.0, "l00_range": DEFAULT_RANGE,
                                                             "l11_range": DEFAULT_RANGE,
                                                             "grid_n": DEFAULT_GRID}),
    ("three-level", "scan-gamma-min"): (cmd_scan_gamma_min, {"l00_range": DEFAULT_RANGE,
                                                             "l10_range": (0.0, 0.5),
                                                             "grid_n": DEFAULT_GRID}),
    ("three-level", "ansatz"): (cmd_ansatz, {"E10": 1.0, "l00": 1.0, "l11": 1.0, "l10": 0.0, "l20": 0.0}),
    ("solve", None): (cmd_solve, {"states": 10, "mode": "perturbative"}),
    ("sumrules", None): (cmd_sumrules, {"max_index": 2, "L": None}),
    ("hydrogenic", None): (cmd_hydrogenic, {"z_max": 100, "alpha_fs": 1.0 / C_AU,
                                            "normalization": "relativity-isolated",
                                            "lambda_variant": "trk"}),
    ("consistency", None): (cmd_consistency, {"samples": 1000}),
}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    fn, defaults = COMMANDS[(ns.command, getattr(ns, "action", None))]
    try:
        opts = resolve(ns, defaults)
        if int(opts["threads"]) < 1:
            raise ConfigError("--threads must be >= 1")
        fn(opts)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
