import csv
import io
import json
import math

import numpy as np
import pytest

from unruh_census.errors import DomainError
from unruh_census.sweep import (COLUMNS, SweepConfig, format_number, knee_from_ratio, knee_from_slope,
                                log_grid, loglog_slope, run_sweep, worker_count, write_rows)
from unruh_census.unruh_core import RegimeTag

from conftest import golden

C_EXACT = golden("constant_C")
D_EXACT = golden("constant_D")


def test_format_number():
    assert format_number(1.0) == "1.000000000e+00"
    assert format_number(None) == ""
    assert len(format_number(math.pi).split("e")[0].replace(".", "")) == 10


def test_log_grid():
    g = log_grid(1.0, 1e3, 4)
    assert len(g) == 13 and g[0] == 1.0 and g[-1] == pytest.approx(1e3)
    assert all(b > a for a, b in zip(g, g[1:]))
    with pytest.raises(DomainError):
        log_grid(10.0, 1.0, 4)


def test_sweep_config_validation():
    with pytest.raises(DomainError):
        SweepConfig(0.0, 1.0, 1.0, ())
    with pytest.raises(DomainError):
        SweepConfig(0.0, 1.0, 1.0, (2.0, 1.0))
    with pytest.raises(DomainError):
        SweepConfig(0.0, 1.0, 1.0, (1.0, 2.0), output_format="xml")
    assert SweepConfig(0.0, 1.0, 1.0, (1.0,)).threshold_si is None


def test_worker_count(monkeypatch):
    monkeypatch.setenv("UNRUH_NUM_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("UNRUH_NUM_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("UNRUH_NUM_THREADS", "many")
    with pytest.raises(DomainError):
        worker_count()


def _small_config(mass_kg=0.0, fmt="csv"):
    return SweepConfig(mass_kg, 1.0, 1.0, log_grid(1e16, 1e18, 2), output_format=fmt)


def test_run_sweep_rows():
    rows = run_sweep(_small_config(), workers=1, constants=(C_EXACT, D_EXACT))
    assert len(rows) == 5
    for row in rows:
        assert row.n_expect >= 0
        assert row.regime in {t.value for t in RegimeTag}
        assert row.status == "ok"
        assert row.a1_natural == pytest.approx(row.a1_si / 299792458.0 ** 2)
        assert row.n_low_limit == pytest.approx(D_EXACT * row.a1_natural ** 3)


def test_sweep_massive_has_no_low_limit():
    cfg = SweepConfig(1e-40, 1.0, 1.0, (1e18, 1e19))
    rows = run_sweep(cfg, workers=1, constants=(C_EXACT, D_EXACT))
    assert all(r.n_low_limit is None for r in rows)
    assert all(r.as_dict()["n_low_limit"] == "" for r in rows)


def test_csv_is_byte_stable_and_parallel_safe():
    cfg = _small_config()
    a, b = io.StringIO(), io.StringIO()
    write_rows(run_sweep(cfg, workers=1, constants=(C_EXACT, D_EXACT)), a)
    write_rows(run_sweep(cfg, workers=2, constants=(C_EXACT, D_EXACT)), b)
    assert a.getvalue() == b.getvalue()
    lines = a.getvalue().splitlines()
    assert lines[0] == ",".join(COLUMNS)
    parsed = list(csv.DictReader(io.StringIO(a.getvalue())))
    assert len(parsed) == 5 and list(parsed[0]) == list(COLUMNS)


def test_json_output():
    rows = run_sweep(_small_config(), workers=1, constants=(C_EXACT, D_EXACT))
    buf = io.StringIO()
    write_rows(rows, buf, "json")
    data = json.loads(buf.getvalue())
    assert len(data) == 5 and list(data[0]) == list(COLUMNS)


def test_loglog_slope_and_knees():
    x = np.geomspace(1e-3, 1e3, 61)
    y = x ** 3 / (1 + x)  # slope 3 -> 2, midpoint where x = 1
    assert loglog_slope(x[:10], y[:10]) == pytest.approx(3.0, abs=0.01)
    assert knee_from_slope(x, y, 3.0, 2.0) == pytest.approx(1.0, rel=0.02)
    ratio = x / (1 + x)
    assert knee_from_ratio(x, ratio, 0.5) == pytest.approx(1.0, rel=0.02)
    with pytest.raises(DomainError):
        knee_from_ratio(x, ratio, 2.0)
    with pytest.raises(DomainError):
        knee_from_slope(x, x ** 4, 3.0, 1.0)
