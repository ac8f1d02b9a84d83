"""Command-line interface: ``cvmdi keyrate``, ``cvmdi figure`` and ``cvmdi selfcheck``.

Exit codes: 0 ok, 1 selfcheck failure, 2 usage error, 3 physics/runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from . import __version__
from .config import ConfigError, RunConfig, parse_grid, resolve_config
from .errors import PhysicsError
from .figures import FIGURES, compute_figure, effective_config
from .keyrate import secret_key_rate
from .selfcheck import run_selfcheck
from .states import StateSpec

EXIT_OK, EXIT_SELFCHECK, EXIT_USAGE, EXIT_PHYSICS = 0, 1, 2, 3


def fmt(value) -> str:
    """Format a CSV cell: floats with 10 significant digits, None as empty."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return f"{float(value):.10g}"


def _common_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    # Every flag defaults to None so that unset flags fall through to the config file.
    p.add_argument("--config", help="JSON config file (fallback: $CVMDI_CONFIG)")
    p.add_argument("--family", help="tmsv, sps-tmsv, tmsc or sps-tmsc")
    p.add_argument("--families", help="comma-separated families for figure sweeps")
    p.add_argument("--V", type=float, help="two-mode squeezing variance (shot-noise units)")
    p.add_argument("--d", type=float, help="displacement (shift of <q> per mode)")
    p.add_argument("--Ts", type=float, help="subtraction beamsplitter transmissivity")
    p.add_argument("--L", type=float, help="Alice-Charlie distance in km")
    p.add_argument("--Lbc", type=float, help="Bob-Charlie distance in km")
    p.add_argument("--beta", type=float, help="reconciliation efficiency")
    p.add_argument("--gain-mode", dest="gain_mode", help="li-optimal, fixed or numeric")
    p.add_argument("--gain", type=float, help="displacement gain for --gain-mode fixed")
    p.add_argument("--K-target", dest="K_target", type=float, help="target key rate for fig5")
    p.add_argument("--V-grid", dest="V_grid", help="variances: 'a,b,c' or 'start:stop:num'")
    p.add_argument("--L-grid", dest="L_grid", help="distances in km: 'a,b,c' or 'start:stop:num'")
    p.add_argument("--fig5-mode", dest="fig5_mode", help="fixed (d, Ts held) or optimized")
    p.add_argument("--engine", help="analytic or fock (keyrate only)")
    p.add_argument("--d-convention", dest="d_convention", help="quadrature (default) or operator")
    p.add_argument("--cutoff-tol", dest="cutoff_tol", type=float, help="Fock convergence tolerance")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format (keyrate: json, figure: csv)")
    p.add_argument("--skip-bad-points", dest="skip_bad_points", action="store_true", default=None,
                   help="omit sweep points that raise physics errors instead of failing")
    p.add_argument("--threads", type=int, help="worker processes for sweeps")
    p.add_argument("--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvmdi", description="CV-MDI-QKD key rates with photon subtraction")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()
    sub.add_parser("keyrate", parents=[common], help="evaluate one key rate and print it as JSON")
    fig = sub.add_parser("figure", parents=[common], help="write a figure table")
    fig.add_argument("name", choices=FIGURES)
    chk = sub.add_parser("selfcheck", help="run the fast invariant suite")
    chk.add_argument("--verbose", action="store_true", help="show per-check timings")
    chk.add_argument("--fixtures", help="directory holding golden fixtures")
    return parser


_SETTINGS = ("family", "V", "d", "Ts", "L", "Lbc", "beta", "gain_mode", "gain", "K_target",
             "fig5_mode", "engine", "d_convention", "cutoff_tol", "out", "format",
             "skip_bad_points", "threads")


def config_from_args(args, scenario: str) -> RunConfig:
    overrides = {key: getattr(args, key) for key in _SETTINGS}
    overrides["scenario"] = scenario
    if args.families is not None:
        overrides["families"] = [f.strip() for f in args.families.split(",") if f.strip()]
    for key in ("V_grid", "L_grid"):
        text = getattr(args, key)
        if text is not None:
            overrides[key] = parse_grid(text)
    return resolve_config(overrides, args.config)


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_keyrate(cfg: RunConfig) -> int:
    spec = StateSpec(cfg.family, cfg.V, cfg.d or 0.0, cfg.Ts)
    link = cfg.link()
    kr = secret_key_rate(spec, link, cfg.gain_mode, cfg.gain, engine=cfg.engine,
                         convention=cfg.d_convention, cutoff_tol=cfg.cutoff_tol)
    if cfg.output_format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["family", "V", "d", "Ts", "L_AC_km", "P_SPS", "I_AB", "chi_BE", "K",
                    "nu1", "nu2", "nu3", "T", "eps_th", "chi_ch", "g"])
        ch = kr.channel
        w.writerow([fmt(x) for x in (spec.family.value, spec.V, spec.d, spec.T_S, link.L_AC, kr.P_SPS,
                                      kr.I_AB, kr.chi_BE, kr.K, kr.nu1, kr.nu2, kr.nu3, ch.T,
                                      ch.eps_th, ch.chi_ch, ch.g)])
        _emit(buf.getvalue(), cfg.out)
    else:
        doc = {"state": spec.as_dict(), "L_AC_km": link.L_AC, "gain_mode": cfg.gain_mode, **kr.as_dict()}
        _emit(json.dumps(doc, indent=2) + "\n", cfg.out)
    return EXIT_OK


def render_figure(name: str, cfg: RunConfig, columns, rows) -> str:
    if cfg.output_format == "json":
        doc = {"figure": name, "config": cfg.provenance(), "columns": list(columns),
               "rows": [list(r) for r in rows]}
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# cvmdi {__version__} figure {name}\n")
    for key, value in cfg.provenance().items():
        buf.write(f"# {key} = {json.dumps(value)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def cmd_figure(name: str, cfg: RunConfig, verbose: bool = False) -> int:
    start = time.perf_counter()
    cfg = effective_config(name, cfg)
    columns, rows, errors = compute_figure(name, cfg)
    if verbose:
        print(f"{name}: {len(rows)} rows in {time.perf_counter() - start:.1f} s", file=sys.stderr)
    if errors:
        for msg in errors:
            print(f"warning: {msg}", file=sys.stderr)
        if not cfg.skip_bad_points:
            print(f"error: {len(errors)} point(s) failed; rerun with --skip-bad-points to omit them",
                  file=sys.stderr)
            return EXIT_PHYSICS
    _emit(render_figure(name, cfg, columns, rows), cfg.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "selfcheck":
        return EXIT_OK if run_selfcheck(args.fixtures, verbose=args.verbose) else EXIT_SELFCHECK
    try:
        scenario = "keyrate" if args.command == "keyrate" else args.name
        cfg = config_from_args(args, scenario)
        if args.command == "keyrate":
            return cmd_keyrate(cfg)
        return cmd_figure(args.name, cfg, args.verbose)
    except (ConfigError, ValueError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PhysicsError as exc:
        print(f"{parser.prog}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
