"""Acceleration sweeps of the census, with the two asymptotic reference lines.

A sweep holds the box depth ``length`` and transverse area fixed and moves the
near-face acceleration ``a1`` along a log-spaced grid, which is how the
census curves against proper acceleration are drawn. Rows are computed
independently (optionally in worker processes) and always emitted in grid
order, so output is byte-identical for a fixed configuration.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import List, Optional, Sequence, TextIO

import numpy as np

from .errors import DomainError, UnruhError
from .unruh_core import (DetectorBox, FieldSpec, NumericsConfig, census_exact,
                         census_high_acc_limit, census_low_acc_limit, classify_regime,
                         constant_C, constant_D)
from .units import CODATA2018, Quantity, UnitSystem, convert_si_to_natural

__all__ = [
    "COLUMNS",
    "SweepConfig",
    "SweepRow",
    "log_grid",
    "run_sweep",
    "write_rows",
    "format_number",
    "worker_count",
    "loglog_slope",
    "knee_from_slope",
    "knee_from_ratio",
]

COLUMNS = ("a1_si", "a1_g", "a1_natural", "n_expect", "n_err", "regime",
           "n_high_limit", "n_low_limit", "status")


def format_number(x: Optional[float]) -> str:
    """Scientific notation with 10 significant digits; empty for ``None``."""
    if x is None:
        return ""
    return f"{x:.9e}"


def log_grid(a_min: float, a_max: float, points_per_decade: int) -> tuple:
    """Log-spaced grid from ``a_min`` to ``a_max`` inclusive."""
    if not (0 < a_min < a_max):
        raise DomainError("require 0 < a_min < a_max")
    if points_per_decade < 1:
        raise DomainError("points_per_decade must be >= 1")
    n = int(round(math.log10(a_max / a_min) * points_per_decade)) + 1
    return tuple(float(v) for v in np.geomspace(a_min, a_max, max(n, 2)))


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a field, a box shape and a grid of accelerations (SI)."""

    mass_kg: float
    length: float
    s_perp: float
    a1_grid: tuple
    numerics: NumericsConfig = dc_field(default_factory=NumericsConfig)
    output_path: Optional[str] = None
    output_format: str = "csv"
    units: UnitSystem = CODATA2018

    def __post_init__(self):
        if not (self.mass_kg >= 0 and math.isfinite(self.mass_kg)):
            raise DomainError("mass must be finite and >= 0")
        if not (self.length > 0 and math.isfinite(self.length)):
            raise DomainError("length must be positive")
        if not (self.s_perp > 0 and math.isfinite(self.s_perp)):
            raise DomainError("sperp must be positive")
        grid = tuple(float(a) for a in self.a1_grid)
        if not grid:
            raise DomainError("the acceleration grid is empty")
        if any(not (a > 0 and math.isfinite(a)) for a in grid):
            raise DomainError("accelerations must be positive and finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("the acceleration grid must be strictly increasing")
        object.__setattr__(self, "a1_grid", grid)
        if self.output_format not in ("csv", "json"):
            raise DomainError(f"unknown output format {self.output_format!r}")

    @property
    def field(self) -> FieldSpec:
        return FieldSpec(convert_si_to_natural(Quantity("mass", self.mass_kg), self.units))

    @property
    def threshold_si(self) -> Optional[float]:
        """``m c^3 / hbar`` in m/s^2, or None for a massless field."""
        if self.mass_kg == 0:
            return None
        u = self.units
        return self.mass_kg * u.c ** 3 / u.hbar


@dataclass(frozen=True)
class SweepRow:
    a1_si: float
    a1_g: float
    a1_natural: float
    n_expect: float
    n_err: float
    regime: str
    n_high_limit: float
    n_low_limit: Optional[float]
    status: str

    def as_strings(self) -> List[str]:
        return [format_number(self.a1_si), format_number(self.a1_g), format_number(self.a1_natural),
                format_number(self.n_expect), format_number(self.n_err), self.regime,
                format_number(self.n_high_limit), format_number(self.n_low_limit), self.status]

    def as_dict(self) -> dict:
        return dict(zip(COLUMNS, self.as_strings()))


def worker_count() -> int:
    """Parallelism cap from ``UNRUH_NUM_THREADS`` (0 or unset means all CPUs)."""
    raw = os.environ.get("UNRUH_NUM_THREADS", "").strip()
    try:
        n = int(raw) if raw else 0
    except ValueError:
        raise DomainError(f"UNRUH_NUM_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise DomainError("UNRUH_NUM_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _point(args):
    field, length, s_perp, a1_nat, numerics = args
    box = DetectorBox.from_acceleration(a1_nat, length, s_perp)
    try:
        res = census_exact(field, box, numerics)
        return res, None
    except UnruhError as exc:
        return None, f"failed:{type(exc).__name__}"


def run_sweep(config: SweepConfig, workers: Optional[int] = None,
              constants: Optional[tuple] = None) -> List[SweepRow]:
    """Evaluate the census at every grid point.

    Parameters
    ----------
    config : SweepConfig
    workers : int, optional
        Process count; defaults to :func:`worker_count`.
    constants : (C, D), optional
        Precomputed asymptotic constants; computed at the sweep tolerance
        otherwise.

    A point that fails or does not converge is reported in the ``status``
    column; the sweep always runs to the end.
    """
    u = config.units
    if constants is None:
        constants = (constant_C(config.numerics), constant_D(config.numerics))
    c_val, d_val = constants
    field = config.field
    a_nat = [convert_si_to_natural(Quantity("acceleration", a), u) for a in config.a1_grid]
    jobs = [(field, config.length, config.s_perp, a, config.numerics) for a in a_nat]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_point, jobs))
    else:
        results = [_point(j) for j in jobs]

    rows = []
    for a_si, a_n, (res, failure) in zip(config.a1_grid, a_nat, results):
        box = DetectorBox.from_acceleration(a_n, config.length, config.s_perp)
        high = census_high_acc_limit(config.s_perp, a_n, c_val)
        low = census_low_acc_limit(config.s_perp * config.length, a_n, d_val) if field.massless else None
        if res is None:
            rows.append(SweepRow(a_si, a_si / u.standard_gravity, a_n, math.nan, math.nan,
                                 str(classify_regime(field, box)), high, low, failure))
            continue
        status = "ok" if res.converged else "not_converged"
        rows.append(SweepRow(a_si, a_si / u.standard_gravity, a_n, res.expectation,
                             res.err_estimate, str(res.regime), high, low, status))
    return rows


def write_rows(rows: Sequence[SweepRow], fh: TextIO, fmt: str = "csv") -> None:
    """Write rows as CSV (header ``COLUMNS``) or as a JSON array of objects."""
    if fmt == "csv":
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in rows:
            w.writerow(row.as_strings())
    elif fmt == "json":
        json.dump([row.as_dict() for row in rows], fh, indent=1)
        fh.write("\n")
    else:
        raise DomainError(f"unknown output format {fmt!r}")


# --------------------------------------------------------------------------
# Curve analysis


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


def knee_from_slope(x: Sequence[float], y: Sequence[float], slope_low: float,
                    slope_high: float) -> float:
    """Abscissa where the local log-log slope crosses the mean of two
    asymptotic slopes (log-linear interpolation between grid midpoints)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    s = np.diff(ly) / np.diff(lx)
    mid = 0.5 * (lx[1:] + lx[:-1])
    target = 0.5 * (slope_low + slope_high)
    d = s - target
    idx = np.flatnonzero(np.sign(d[:-1]) != np.sign(d[1:]))
    if idx.size == 0:
        raise DomainError("local slope never crosses the midpoint slope on this grid")
    i = idx[0]
    t = d[i] / (d[i] - d[i + 1])
    return float(math.exp(mid[i] + t * (mid[i + 1] - mid[i])))


def knee_from_ratio(x: Sequence[float], ratio: Sequence[float], level: float) -> float:
    """Abscissa where an increasing ``ratio`` first reaches ``level``
    (interpolated in log-log)."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(ratio, dtype=float)
    above = np.flatnonzero(r >= level)
    if above.size == 0 or above[0] == 0:
        raise DomainError("ratio does not cross the requested level inside the grid")
    i = above[0]
    lr0, lr1 = math.log(max(r[i - 1], 1e-300)), math.log(r[i])
    t = (math.log(level) - lr0) / (lr1 - lr0)
    return float(math.exp(math.log(x[i - 1]) + t * (math.log(x[i]) - math.log(x[i - 1]))))
