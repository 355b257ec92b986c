"""Acceptance gate: one PASS/FAIL line per criterion, at the contract tolerances.

Run on its own with ``python3 -m pytest tests/test_acceptance.py -v -s`` to see
the lines as they are produced; a full run lists them again in the terminal
summary under "acceptance criteria".
"""

import csv
import math
import re
import time
from pathlib import Path

import numpy as np
import pytest

from unruh_census.cli import main
from unruh_census.nonlocality import bateman_lhs, bateman_rhs, discrepancy_report, format_report
from unruh_census.specfun import bessel_k_imag, bessel_k_int
from unruh_census.sweep import COLUMNS, knee_from_ratio, knee_from_slope, loglog_slope
from unruh_census.unruh_core import (DetectorBox, FieldSpec, RegimeTag, census_exact, constant_C,
                                     constant_D)
from unruh_census.units import CODATA2018

from conftest import golden, golden_records, record_acceptance

REPORTS = Path(__file__).resolve().parents[1] / "reports"
C_EXACT = golden("constant_C")
D_EXACT = golden("constant_D")
NUMBER = re.compile(r"^-?\d\.\d{9}e[+-]\d{2,3}$")


def census(mass, chi1, chi2, s_perp=1.0):
    return census_exact(FieldSpec(mass), DetectorBox(chi1, chi2, s_perp))


def test_criterion_01_constant_C():
    t0 = time.perf_counter()
    value = constant_C()
    elapsed = time.perf_counter() - t0
    ok = abs(value - 0.000246) <= 1e-6 and elapsed <= 300
    detail = f"C = {value:.9e}, |C - 0.000246| = {abs(value - 0.000246):.2e} (tol 1e-6), {elapsed:.1f} s (limit 300 s)"
    assert record_acceptance("criterion 1 (constant C)", ok, detail)


def test_criterion_02_constant_D():
    t0 = time.perf_counter()
    value = constant_D()
    elapsed = time.perf_counter() - t0
    ok = abs(value - 0.000491) <= 1e-6 and elapsed <= 60
    detail = f"D = {value:.9e}, |D - 0.000491| = {abs(value - 0.000491):.2e} (tol 1e-6), {elapsed:.1f} s (limit 60 s)"
    assert record_acceptance("criterion 2 (constant D)", ok, detail)


def test_criterion_03_high_acceleration_convergence():
    ladder = [10.0 ** -k for k in range(0, 7)]
    ratios = []
    for chi1 in ladder:
        res = census(0.0, chi1, 1e3 * chi1)
        ratios.append(res.expectation / (C_EXACT / chi1 ** 2))
    inside = [0.99 <= r <= 1.01 for r in ratios]
    first = inside.index(True) if any(inside) else None
    ok = first is not None and all(inside[first:])
    detail = "ratios " + ", ".join(f"{r:.6f}" for r in ratios) + " over chi1 = 1 .. 1e-6"
    assert record_acceptance("criterion 3 (high-acceleration convergence)", ok, detail)


def test_criterion_04_mass_independence():
    values = [census(mu, 1.0, 1e3).expectation for mu in (0.0, 1e-3, 1e-2)]
    spread = (max(values) - min(values)) / max(values)
    ok = spread <= 0.02
    detail = "census " + ", ".join(f"{v:.6e}" for v in values) + f" for m chi1 = 0, 1e-3, 1e-2; spread {spread:.2e} (tol 2e-2)"
    assert record_acceptance("criterion 4 (mass independence)", ok, detail)


def test_criterion_05a_low_acceleration_law():
    chi1, rho = 1.0, 1.01
    box = DetectorBox(chi1, rho * chi1, 1.0)
    exact = census_exact(FieldSpec(0.0), box).expectation
    limit = D_EXACT * box.volume * box.a1 ** 3
    ratio = exact / limit
    ok = abs(ratio - 1.0) <= 0.01
    detail = f"chi2/chi1 = 1.01: census / (D V a1^3) = {ratio:.6f} (tol 1e-2)"
    assert record_acceptance("criterion 5a (low-acceleration law at chi2/chi1 = 1.01)", ok, detail)


def _slope_over_decade(lo_exponent, length=1.0, points=6):
    a1 = np.logspace(lo_exponent, lo_exponent + 1, points) / length
    n = [census(0.0, 1.0 / a, 1.0 / a + length).expectation for a in a1]
    return loglog_slope(a1, n)


def test_criterion_05b_slopes_around_knee():
    low = _slope_over_decade(-3)
    high = _slope_over_decade(2)
    ok = abs(low - 3.0) <= 0.05 and abs(high - 2.0) <= 0.05
    detail = (f"slope {low:.4f} over a1 L in [1e-3, 1e-2] (want 3.00 +- 0.05), "
              f"{high:.4f} over a1 L in [1e2, 1e3] (want 2.00 +- 0.05)")
    assert record_acceptance("criterion 5b (log-log slopes either side of the knee)", ok, detail)


def test_criterion_06_sudden_birth():
    # fixed mass and aspect chi2/chi1 = 3, near face moved from 0.1/m to 10/m
    far = census(1.0, 10.0, 30.0).expectation
    near = census(1.0, 0.1, 0.3).expectation
    ok = far * 1e10 <= near
    detail = f"census(m chi1 = 10) / census(m chi1 = 0.1) = {far / near:.3e} (want <= 1e-10)"
    assert record_acceptance("criterion 6 (sudden birth)", ok, detail)


def test_criterion_07_length_saturation():
    short = census(1.0, 0.1, 0.1 + 100.0).expectation
    long_ = census(1.0, 0.1, 0.1 + 1000.0).expectation
    change = abs(long_ - short) / short
    ok = change < 1e-3
    detail = f"m chi1 = 0.1, depth 100/m -> 1000/m: relative change {change:.2e} (tol 1e-3)"
    assert record_acceptance("criterion 7 (length saturation)", ok, detail)


def test_criterion_08_scale_invariance():
    base = census(1.0, 0.5, 2.0, 1.0)
    worst = 0.0
    ok = True
    for lam in (0.5, 2.0, 10.0):
        scaled = census(1.0 / lam, 0.5 * lam, 2.0 * lam, lam ** 2)
        diff = abs(scaled.expectation - base.expectation)
        ok &= diff <= scaled.err_estimate + base.err_estimate
        worst = max(worst, diff / (scaled.err_estimate + base.err_estimate))
    detail = f"lambda = 0.5, 2, 10: worst |dN| / (err1 + err2) = {worst:.3f} (want <= 1)"
    assert record_acceptance("criterion 8 (scale invariance)", bool(ok), detail)


def test_criterion_09_special_function_oracles():
    records = golden_records("bessel_k_imag")
    grid = {(p["nu"], p["x"]) for _, p, _, _ in records}
    expected = {(nu, x) for nu in (0.0, 0.5, 1.0, 2.0, 5.0, 12.0) for x in (1e-3, 1e-1, 1.0, 5.0, 30.0)}
    worst = max(abs(bessel_k_imag(p["nu"], p["x"]) - v) / abs(v) for _, p, v, _ in records)
    xs = np.array(sorted({x for _, x in expected}))
    same_k0 = max(abs(bessel_k_imag(0.0, x) - bessel_k_int(0, x)) / bessel_k_int(0, x) for x in xs)
    dense = np.geomspace(1e-3, 30.0, 60)
    k0 = bessel_k_int(0, dense)
    bounded = all(np.all(np.abs(bessel_k_imag(nu, dense)) <= k0 * (1 + 1e-13))
                  for nu in (0.0, 0.5, 1.0, 2.0, 5.0, 12.0))
    ok = grid == expected and worst <= 1e-10 and same_k0 <= 1e-12 and bounded
    detail = (f"30-point grid worst relative error {worst:.2e} (tol 1e-10); "
              f"K_i0 vs K_0 {same_k0:.1e}; |K_inu| <= K_0 on 360 samples: {bounded}")
    assert record_acceptance("criterion 9 (special-function oracles)", ok, detail)


def test_criterion_10_bateman_identity():
    worst = 0.0
    for nu in (1, 2):
        for alpha in (0.5, 1.0, 2.0):
            for y in (0.5, 1.0, 2.0):
                lhs = bateman_lhs(alpha, y, nu).value
                rhs = bateman_rhs(alpha, y, nu)
                worst = max(worst, abs(lhs - rhs) / abs(rhs))
    ok = worst <= 1e-8
    detail = f"18 points, worst relative deviation {worst:.2e} (tol 1e-8)"
    assert record_acceptance("criterion 10 (Bateman identity)", ok, detail)


def test_criterion_11_commutator_verification():
    rows = discrepancy_report(1.0, np.geomspace(0.1, 5.0, 9))
    report = format_report(rows)
    REPORTS.mkdir(exist_ok=True)
    path = REPORTS / "commutator_discrepancy.txt"
    path.write_text(report + "\n")
    winners = {}
    for kind in ("phiphi", "pipi"):
        picks = [tuple(r.matches(1e-6)) for r in rows if r.kind == kind]
        winners[kind] = picks[0] if len(set(picks)) == 1 and len(picks[0]) == 1 and len(picks) == 9 else None
    ok = all(w is not None for w in winners.values()) and path.exists()
    detail = (f"phiphi -> {winners['phiphi']}, pipi -> {winners['pipi']} on 9 points (tol 1e-6); "
              f"report written to reports/{path.name}")
    assert record_acceptance("criterion 11 (commutator verification)", ok, detail)


# ------------------------------------------------------------- figure presets

def _run_preset(name):
    out = REPORTS / "figures" / f"{name}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    code = main(["sweep", "--preset", name, "--output", str(out)])
    text = out.read_text()
    return code, text


def _schema_problems(text, massless):
    problems = []
    lines = text.splitlines()
    if not lines or lines[0] != ",".join(COLUMNS):
        problems.append("header")
    rows = list(csv.DictReader(text.splitlines()))
    tags = {t.value for t in RegimeTag}
    for row in rows:
        for key in ("a1_si", "a1_g", "a1_natural", "n_expect", "n_err", "n_high_limit"):
            if not NUMBER.match(row[key]):
                problems.append(f"{key}={row[key]!r}")
        low = row["n_low_limit"]
        if (massless and not NUMBER.match(low)) or (not massless and low != ""):
            problems.append(f"n_low_limit={low!r}")
        if row["regime"] not in tags or row["status"] != "ok":
            problems.append(f"{row['regime']}/{row['status']}")
    return rows, problems


@pytest.mark.slow
def test_criterion_12_figure_presets():
    lines = []
    ok = True
    u = CODATA2018
    for mass_me in ("1e-11", "1e-10", "1e-9"):
        name = f"figure2_m{mass_me}"
        code, text = _run_preset(name)
        rows, problems = _schema_problems(text, massless=False)
        a1 = np.array([float(r["a1_si"]) for r in rows])
        ratio = np.array([float(r["n_expect"]) / float(r["n_high_limit"]) for r in rows])
        predicted = float(mass_me) * u.electron_mass * u.c ** 3 / u.hbar
        knee = knee_from_ratio(a1, ratio, 0.1)
        good = code == 0 and not problems and 0.5 <= knee / predicted <= 2.0
        ok &= good
        lines.append(f"{name}: {len(rows)} rows, knee/(mc^3/hbar) = {knee / predicted:.3f}"
                     + (f", schema issues {problems[:3]}" if problems else ""))
    for tag, length in (("L1m", 1.0), ("L1mm", 1e-3), ("L1um", 1e-6)):
        name = f"figure3_{tag}"
        code, text = _run_preset(name)
        rows, problems = _schema_problems(text, massless=True)
        a1 = np.array([float(r["a1_si"]) for r in rows])
        n = np.array([float(r["n_expect"]) for r in rows])
        predicted = u.c ** 2 / length
        knee = knee_from_slope(a1, n, 3.0, 2.0)
        low = loglog_slope(a1[:7], n[:7])
        high = loglog_slope(a1[-7:], n[-7:])
        good = (code == 0 and not problems and 0.5 <= knee / predicted <= 2.0
                and abs(low - 3.0) <= 0.05 and abs(high - 2.0) <= 0.05)
        ok &= good
        lines.append(f"{name}: {len(rows)} rows, knee/(c^2/L) = {knee / predicted:.3f}, "
                     f"end slopes {low:.3f} / {high:.3f}"
                     + (f", schema issues {problems[:3]}" if problems else ""))
    assert record_acceptance("criterion 12 (figure presets)", bool(ok), "; ".join(lines))
