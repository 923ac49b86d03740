"""Batch command-line front end.

Subcommands::

    chemokin mc-run <config>      run the particle engine
    chemokin ks-run <config>      run the KS solver
    chemokin exks-run <config>    run the extended solver
    chemokin preset <name> [--scale desk|full]
    chemokin sweep <config-dir> [--parallelism N]
    chemokin diag dd <profile.csv>
    chemokin diag collapse <csv> <csv> ... --betas b1,b2,...
    chemokin diag slice <profile2d.csv> --value V [--axis 0|1]

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 partial sweep failure.  All file outputs land under a run directory named
by timestamp and config digest inside ``--out-root`` (default ``runs``).
The only environment variable consulted is ``CHEMOKIN_THREADS`` (sweep
parallelism); everything else flows through config files so manifests stay
complete.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import parse_config
from .csvio import read_profile_csv
from .diagnostics import center_second_derivative, rescale_collapse
from .errors import ConfigError, NumericalError
from .presets import PRESET_NAMES, run_preset, sweep
from .runner import execute_config, run_dir_name

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chemokin", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    for eng in ("mc", "ks", "exks"):
        p = sub.add_parser(f"{eng}-run", help=f"run one {eng} configuration")
        p.add_argument("config", type=Path)
        p.add_argument("--out-root", type=Path, default=Path("runs"))

    p = sub.add_parser("preset", help="run a figure-reproduction preset")
    p.add_argument("name", choices=PRESET_NAMES)
    p.add_argument("--scale", choices=("desk", "full"), default="desk")
    p.add_argument("--out-root", type=Path, default=Path("runs"))

    p = sub.add_parser("sweep", help="run every *.cfg in a directory")
    p.add_argument("config_dir", type=Path)
    p.add_argument("--out-root", type=Path, default=Path("runs"))
    p.add_argument("--parallelism", type=int, default=None)

    p = sub.add_parser("diag", help="diagnostics over existing CSV outputs")
    dsub = p.add_subparsers(dest="diag_command", required=True)
    pd = dsub.add_parser("dd", help="center second derivatives of a 1D profile")
    pd.add_argument("profile", type=Path)
    pc = dsub.add_parser("collapse", help="rescaled-axis collapse error")
    pc.add_argument("profiles", type=Path, nargs="+")
    pc.add_argument("--betas", required=True, help="comma-separated, one per profile")
    pc.add_argument("--normalization", choices=("peak", "mass"), default="peak")
    ps = dsub.add_parser("slice", help="extract a lattice line from a 2D profile")
    ps.add_argument("profile", type=Path)
    ps.add_argument("--value", type=float, required=True)
    ps.add_argument("--axis", type=int, choices=(0, 1), default=0)
    return ap


def _cmd_run(engine: str, args) -> int:
    text = args.config.read_text()
    cfg = parse_config(text)
    if cfg.engine != engine:
        raise ConfigError(f"config declares engine={cfg.engine}, command expects {engine}")
    out_dir = args.out_root / run_dir_name(cfg)
    manifest = execute_config(cfg, out_dir)
    print(manifest)
    return EXIT_OK


def _cmd_diag(args) -> int:
    if args.diag_command == "dd":
        cols = read_profile_csv(args.profile)
        dx = float(cols["x"][1] - cols["x"][0])
        for name in ("rho", "rho_f", "rho_g"):
            if name in cols:
                print(f"{name}_dd={center_second_derivative(cols[name], dx):.17g}")
        return EXIT_OK
    if args.diag_command == "collapse":
        betas = [float(tok) for tok in args.betas.split(",")]
        if len(betas) != len(args.profiles):
            raise ConfigError("need exactly one beta per profile")
        profiles = []
        for beta, path in zip(betas, args.profiles):
            cols = read_profile_csv(path)
            profiles.append((beta, cols["x"], cols["rho"]))
        err = rescale_collapse(profiles, normalization=args.normalization)
        print(f"collapse_linf={err:.17g}")
        return EXIT_OK
    # slice
    cols = read_profile_csv(args.profile)
    x1 = np.unique(cols["x1"])
    n = len(x1)
    if n * n != len(cols["x1"]):
        raise ConfigError("2D profile CSV is not a full row-major lattice")
    fixed = cols["x1"] if args.axis == 0 else cols["x2"]
    dx = float(x1[1] - x1[0])
    lo = fixed - 0.5 * dx
    mask = (lo <= args.value) & (args.value < lo + dx)
    if not mask.any():
        raise ConfigError(f"value {args.value} selects no lattice row")
    coord = (cols["x2"] if args.axis == 0 else cols["x1"])[mask]
    order = np.argsort(coord)
    print("coord,rho,rho_f,rho_g,xi_bar")
    for i in order:
        row = [coord[i]] + [cols[k][mask][i] for k in ("rho", "rho_f", "rho_g", "xi_bar")]
        print(",".join("NA" if np.isnan(v) else f"{v:.17g}" for v in row))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command in ("mc-run", "ks-run", "exks-run"):
            return _cmd_run(args.command.split("-")[0], args)
        if args.command == "preset":
            index = run_preset(args.name, args.scale, args.out_root)
            print(index)
            return EXIT_OK
        if args.command == "sweep":
            result = sweep(args.config_dir, args.out_root, args.parallelism)
            print(f"configs={result['configs']} failed={result['failed']}")
            return EXIT_PARTIAL if result["failed"] else EXIT_OK
        if args.command == "diag":
            return _cmd_diag(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
