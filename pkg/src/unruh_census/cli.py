"""Command-line front end.

SI quantities are converted to natural units (hbar = c = 1, lengths in
metres) on the way in, and every acceleration is reported back in m/s^2, in
multiples of standard gravity and in 1/m.

Exit codes: 0 on success, 1 for usage or domain errors, 2 when a numerical
result did not reach its tolerance (the best estimate is still printed).
"""

from __future__ import annotations

import argparse
import configparser
import contextlib
import csv
import json
import math
import sys
from importlib import resources
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import ToleranceNotMetError, UnruhError
from .nonlocality import discrepancy_report, format_report
from .quadrature import QuadSpec
from .specfun import bessel_k_imag, bessel_k_int
from .sweep import SweepConfig, format_number, log_grid, run_sweep, write_rows
from .units import CODATA2018, Quantity, acceleration_to_si, convert_si_to_natural, mass_to_kg
from .unruh_core import (DetectorBox, FieldSpec, NumericsConfig, census_exact,
                         census_high_acc_limit, census_low_acc_limit, constant_C, constant_D)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2

PRESET_PACKAGE = "unruh_census.presets"

# keys a sweep config file may set, with their parsers
SWEEP_KEYS = {
    "mass": float,
    "mass-unit": str,
    "length": float,
    "sperp": float,
    "a1-min": float,
    "a1-max": float,
    "a1-unit": str,
    "points-per-decade": int,
    "tol": float,
    "format": str,
    "output": str,
}


class UsageError(Exception):
    """Bad command-line input; reported on stderr with exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for non-convergence here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# helpers


def numerics_from_tol(tol: Optional[float]) -> NumericsConfig:
    if tol is None:
        return NumericsConfig()
    if not (0 < tol < 1):
        raise UsageError(f"--tol must lie in (0, 1), got {tol!r}")
    return NumericsConfig(quad=QuadSpec(rel_tol=tol, abs_tol=1e-16))


def emit_records(records: List[Dict[str, str]], fmt: str, out) -> None:
    """Write flat records as CSV (header + rows) or as a JSON array."""
    if fmt == "json":
        json.dump(records, out, indent=1)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(records[0]))
    for rec in records:
        w.writerow(list(rec.values()))


@contextlib.contextmanager
def open_output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def list_presets() -> List[str]:
    files = resources.files(PRESET_PACKAGE).iterdir()
    return sorted(p.name[:-4] for p in files if p.name.endswith(".cfg"))


def read_config_text(text: str, origin: str) -> Dict[str, object]:
    """Parse a flat ``key = value`` file whose keys are sweep flag names."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[sweep]\n" + text, source=origin)
    except configparser.Error as exc:
        raise UsageError(f"{origin}: {exc}") from None
    out = {}
    for key, raw in parser["sweep"].items():
        if key not in SWEEP_KEYS:
            raise UsageError(f"{origin}: unknown key {key!r}")
        try:
            out[key] = SWEEP_KEYS[key](raw)
        except ValueError:
            raise UsageError(f"{origin}: bad value for {key}: {raw!r}") from None
    return out


def load_preset(name: str) -> Dict[str, object]:
    if name not in list_presets():
        raise UsageError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    text = resources.files(PRESET_PACKAGE).joinpath(name + ".cfg").read_text()
    return read_config_text(text, name + ".cfg")


def _positive(name: str, value: float) -> float:
    if not (value > 0 and math.isfinite(value)):
        raise UsageError(f"{name} must be positive and finite, got {value!r}")
    return value


def _threshold_record(mass_kg: float) -> Dict[str, str]:
    if mass_kg == 0:
        return {"threshold_si": "", "threshold_g": "", "threshold_natural": ""}
    u = CODATA2018
    a_si = mass_kg * u.c ** 3 / u.hbar
    return {"threshold_si": format_number(a_si),
            "threshold_g": format_number(a_si / u.standard_gravity),
            "threshold_natural": format_number(convert_si_to_natural(Quantity("acceleration", a_si)))}


# --------------------------------------------------------------------------
# subcommands


def cmd_census(args) -> int:
    mass_kg = mass_to_kg(args.mass, args.mass_unit)
    if mass_kg < 0:
        raise UsageError("--mass must be >= 0")
    field = FieldSpec(convert_si_to_natural(Quantity("mass", mass_kg)))
    if args.chi1 is not None:
        chi1 = _positive("--chi1", args.chi1)
    else:
        a_si = acceleration_to_si(_positive("--a1", args.a1), args.a1_unit)
        chi1 = 1.0 / convert_si_to_natural(Quantity("acceleration", a_si))
    if args.chi2 is not None:
        if not args.chi2 >= chi1:
            raise UsageError(f"--chi2 ({args.chi2}) must not be smaller than chi1 ({chi1})")
        chi2 = args.chi2
    else:
        chi2 = chi1 + _positive("--length", args.length)
    box = DetectorBox(chi1, chi2, _positive("--sperp", args.sperp))
    cfg = numerics_from_tol(args.tol)
    res = census_exact(field, box, cfg)
    c_val, d_val = constant_C(cfg), constant_D(cfg)
    a_nat = 1.0 / chi1
    rec = {
        "chi1": format_number(chi1),
        "chi2": format_number(chi2),
        "a1_si": format_number(a_nat * CODATA2018.c ** 2),
        "n_expect": format_number(res.expectation),
        "n_err": format_number(res.err_estimate),
        "regime": str(res.regime),
        "n_high_limit": format_number(census_high_acc_limit(box.s_perp, a_nat, c_val)),
        "n_low_limit": (format_number(census_low_acc_limit(box.volume, a_nat, d_val))
                        if field.massless else ""),
        **_threshold_record(mass_kg),
        "converged": str(res.converged).lower(),
    }
    with open_output(args.output) as out:
        emit_records([rec], args.format or "csv", out)
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def _sweep_settings(args) -> Dict[str, object]:
    settings: Dict[str, object] = {"mass": 0.0, "mass-unit": "me", "sperp": 1.0, "a1-unit": "si",
                                   "points-per-decade": 6}
    if args.preset:
        settings.update(load_preset(args.preset))
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        settings.update(read_config_text(text, args.config))
    for key in SWEEP_KEYS:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            settings[key] = value
    return settings


def cmd_sweep(args) -> int:
    if args.list_presets:
        print("\n".join(list_presets()))
        return EXIT_OK
    s = _sweep_settings(args)
    for key in ("length", "a1-min", "a1-max"):
        if key not in s:
            raise UsageError(f"sweep needs --{key} (directly, via --config or via --preset)")
    unit = str(s["a1-unit"])
    a_lo = acceleration_to_si(float(s["a1-min"]), unit)
    a_hi = acceleration_to_si(float(s["a1-max"]), unit)
    grid = log_grid(a_lo, a_hi, int(s["points-per-decade"])) if a_hi > a_lo else ()
    fmt = str(s.get("format") or "csv")
    config = SweepConfig(
        mass_kg=mass_to_kg(float(s["mass"]), str(s["mass-unit"])),
        length=float(s["length"]),
        s_perp=float(s["sperp"]),
        a1_grid=grid,
        numerics=numerics_from_tol(s.get("tol")),
        output_path=s.get("output"),
        output_format=fmt,
    )
    rows = run_sweep(config)
    with open_output(config.output_path) as out:
        write_rows(rows, out, config.output_format)
    return EXIT_OK if all(r.status == "ok" for r in rows) else EXIT_NOT_CONVERGED


def cmd_constants(args) -> int:
    cfg = numerics_from_tol(args.tol)
    status = EXIT_OK
    values = []
    for name, fn in (("C", constant_C), ("D", constant_D)):
        try:
            res = fn(cfg, full=True)
        except ToleranceNotMetError as exc:
            res, status = exc.best, EXIT_NOT_CONVERGED
        values.append({"name": name, "value": format_number(res.value),
                       "err_estimate": format_number(res.err_estimate),
                       "converged": str(res.converged).lower()})
    with open_output(args.output) as out:
        emit_records(values, args.format or "csv", out)
    return status


def cmd_threshold(args) -> int:
    mass_kg = mass_to_kg(args.mass, args.mass_unit)
    if not mass_kg > 0:
        raise UsageError("--mass must be positive")
    rec = {"mass_kg": format_number(mass_kg), **_threshold_record(mass_kg)}
    with open_output(args.output) as out:
        emit_records([rec], args.format or "csv", out)
    return EXIT_OK


def cmd_commutator(args) -> int:
    _positive("--mass", args.mass)
    _positive("--rmin", args.rmin)
    if not args.rmax > args.rmin:
        raise UsageError("--rmax must exceed --rmin")
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    grid = np.geomspace(args.rmin, args.rmax, args.points)
    spec = QuadSpec(rel_tol=args.tol, abs_tol=1e-15) if args.tol is not None else None
    rows = discrepancy_report(args.mass, grid, spec=spec)
    with open_output(args.output) as out:
        if args.format is None:
            out.write(format_report(rows) + "\n")
        else:
            emit_records([{"kind": r.kind, "mass": format_number(r.mass), "r": format_number(r.r),
                           "oracle": format_number(r.oracle), "oracle_err": format_number(r.oracle_err),
                           "derived": format_number(r.derived),
                           "alternative": format_number(r.alternative),
                           "match": "+".join(r.matches()) or "none", "status": r.status}
                          for r in rows], args.format, out)
    return EXIT_OK if all(r.status == "ok" for r in rows) else EXIT_NOT_CONVERGED


def cmd_bessel(args) -> int:
    if not (args.x > 0 and math.isfinite(args.x)):
        raise UsageError(f"--x must be positive, got {args.x!r}")
    if args.imag:
        value = float(bessel_k_imag(args.nu, args.x))
        label = "K_i"
    else:
        if args.nu != int(args.nu):
            raise UsageError("real orders must be integers (use --imag for K_{i nu})")
        value = float(bessel_k_int(int(args.nu), args.x))
        label = "K_"
    with open_output(args.output) as out:
        if args.format is None:
            out.write(f"{label}{args.nu:g}({args.x:g}) = {value:.15e}\n")
        else:
            emit_records([{"nu": format_number(args.nu), "x": format_number(args.x),
                           "imag": str(args.imag).lower(), "value": format_number(value)}],
                         args.format, out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--tol", type=float, default=default,
                        help="relative tolerance of the numerical integrals")
    parser.add_argument("--format", choices=("csv", "json"), default=default,
                        help="output format (default: csv; text tables where available)")
    parser.add_argument("--output", metavar="PATH", default=default,
                        help="write to PATH instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="unruh-census",
                     description="Unruh particle census in a uniformly accelerated box.")
    _global_options(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("census", parents=[common], help="census for one box")
    p.add_argument("--mass", type=float, default=0.0, help="field mass (default 0, massless)")
    p.add_argument("--mass-unit", choices=("me", "kg", "natural"), default="me",
                   help="unit of --mass: electron masses, kg or 1/m (default me)")
    near = p.add_mutually_exclusive_group(required=True)
    near.add_argument("--chi1", type=float, help="near-face distance to the horizon [m]")
    near.add_argument("--a1", type=float, help="near-face proper acceleration")
    p.add_argument("--a1-unit", choices=("si", "g", "natural"), default="si",
                   help="unit of --a1: m/s^2, standard gravity or 1/m (default si)")
    far = p.add_mutually_exclusive_group(required=True)
    far.add_argument("--chi2", type=float, help="far-face distance to the horizon [m]")
    far.add_argument("--length", type=float, help="box depth chi2 - chi1 [m]")
    p.add_argument("--sperp", type=float, default=1.0, help="transverse area [m^2]")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("sweep", parents=[common], help="census over an acceleration grid")
    p.add_argument("--preset", help="named preset (see --list-presets)")
    p.add_argument("--config", help="flat 'key = value' file; keys are sweep flag names")
    p.add_argument("--list-presets", action="store_true", help="print preset names and exit")
    p.add_argument("--mass", type=float, help="field mass (default 0)")
    p.add_argument("--mass-unit", choices=("me", "kg", "natural"), help="unit of --mass (default me)")
    p.add_argument("--length", type=float, help="box depth [m]")
    p.add_argument("--sperp", type=float, help="transverse area [m^2] (default 1)")
    p.add_argument("--a1-min", type=float, help="smallest near-face acceleration")
    p.add_argument("--a1-max", type=float, help="largest near-face acceleration")
    p.add_argument("--a1-unit", choices=("si", "g", "natural"), help="unit of the a1 range (default si)")
    p.add_argument("--points-per-decade", type=int, help="grid density (default 6)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("constants", parents=[common], help="asymptotic constants C and D")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("threshold", parents=[common], help="sudden-birth acceleration m c^3 / hbar")
    p.add_argument("--mass", type=float, required=True, help="field mass, > 0")
    p.add_argument("--mass-unit", choices=("me", "kg", "natural"), default="me",
                   help="unit of --mass (default me)")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("commutator", parents=[common], help="commutator closed forms vs. oracle")
    p.add_argument("--mass", type=float, default=1.0, help="mass in 1/m")
    p.add_argument("--rmin", type=float, default=0.1, help="smallest separation [m]")
    p.add_argument("--rmax", type=float, default=5.0, help="largest separation [m]")
    p.add_argument("--points", type=int, default=9, help="log-spaced grid points")
    p.set_defaults(func=cmd_commutator)

    p = sub.add_parser("bessel", parents=[common], help="evaluate K_nu(x) or K_{i nu}(x)")
    p.add_argument("--nu", type=float, required=True, help="order (integer 0, 1 or 2 unless --imag)")
    p.add_argument("--x", type=float, required=True, help="argument, > 0")
    p.add_argument("--imag", action="store_true", help="imaginary order i*nu")
    p.set_defaults(func=cmd_bessel)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep":
        # global flags also count as sweep settings, overriding the config file
        for key in ("tol", "format", "output"):
            setattr(args, key, getattr(args, key, None))
    try:
        return args.func(args)
    except ToleranceNotMetError as exc:
        print(f"unruh-census {args.command}: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except (UsageError, UnruhError, ValueError) as exc:
        print(f"unruh-census {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
