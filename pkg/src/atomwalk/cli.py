"""Command line entry point.

    atomwalk list
    atomwalk species
    atomwalk run <scenario|config.yaml> [--out DIR] [--format csv|json] [--workers N]
                 [--grid-points N] [--periods X]
    atomwalk sweep <spec.yaml> [--out DIR] [--workers N]

Exit codes: 0 success, 2 configuration error, 3 numerical validation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import resolve
from .errors import ConfigError, DomainError, GridError, InvalidParameterError, NumericalValidationError
from .scenarios import list_scenarios, load_sweep, run_scenario, run_sweep
from .units import SPECIES_PRESETS, derive_recoil

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parser():
    parser = argparse.ArgumentParser(prog="atomwalk",
                                     description="Two-level atom walking in a traveling-wave light")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list built-in scenarios")
    sub.add_parser("species", help="list species presets and their recoil scales")

    run = sub.add_parser("run", help="run a built-in scenario or a YAML config")
    run.add_argument("target", help="built-in scenario name or path to a config file")
    run.add_argument("--out", default="out", help="output directory (default: out)")
    run.add_argument("--format", choices=["csv", "json"], default=None,
                     help="data file format (default: from config, csv)")
    run.add_argument("--workers", type=int, default=1, help="worker threads for density slices")
    run.add_argument("--grid-points", type=int, default=None, help="override grid.n_points")
    run.add_argument("--periods", type=float, default=None, help="override time.periods")

    sweep = sub.add_parser("sweep", help="run a two-axis parameter sweep")
    sweep.add_argument("spec", help="path to a sweep YAML file")
    sweep.add_argument("--out", default="out", help="output directory (default: out)")
    sweep.add_argument("--workers", type=int, default=1, help="worker processes")
    sweep.add_argument("--format", choices=["csv", "json"], default=None,
                       help="accepted for symmetry; sweeps always write CSV and JSON")
    sweep.add_argument("--grid-points", type=int, default=None, help="override grid.n_points")
    sweep.add_argument("--periods", type=float, default=None, help="override time.periods")
    return parser


def _overrides(args):
    out = {}
    if args.grid_points is not None:
        out["grid.n_points"] = args.grid_points
    if args.periods is not None:
        out["time.periods"] = args.periods
    return out


def _cmd_list(args):
    for name, desc in list_scenarios():
        print(f"{name:14s} {desc}")


def _cmd_species(args):
    for name, sp in SPECIES_PRESETS.items():
        s = derive_recoil(sp)
        print(f"{name}: {sp.label}; M = {sp.mass_amu} u, lambda = {sp.wavelength * 1e9:g} nm")
        print(f"  hbar k = {s.hbar_k:.6e} kg m/s, omega_B = 2pi x {s.omega_B / 6.283185307179586:.6g} Hz, "
              f"walk velocity = {s.half_recoil_velocity * 1e9:.6g} nm/s")


def _cmd_run(args):
    cfg = resolve(args.target)
    overrides = _overrides(args)
    if overrides:
        cfg = cfg.with_overrides(**overrides)
    formats = (args.format,) if args.format else None
    result = run_scenario(cfg, out_dir=args.out, formats=formats, workers=args.workers)
    for path in result.paths:
        print(path)
    if result.regime is not None:
        r = result.regime
        print(f"regime: {r.verdict} (epsilon_eff = {r.epsilon_effective:.3g}, "
              f"max|delta|/Omega = {r.ratio:.3g})")


def _cmd_sweep(args):
    spec, base = load_sweep(args.spec)
    overrides = _overrides(args)
    if overrides:
        base = base.with_overrides(**overrides)
    result = run_sweep(spec, base, out_dir=args.out, workers=args.workers)
    n1, n2 = result.table.shape
    print(f"{spec.name}: {n1} x {n2} cells of {spec.reduction} written to {args.out}")


COMMANDS = {"list": _cmd_list, "species": _cmd_species, "run": _cmd_run, "sweep": _cmd_sweep}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except NumericalValidationError as exc:
        print(f"numerical validation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, InvalidParameterError, GridError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
