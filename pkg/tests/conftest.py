import math
from pathlib import Path

import pytest

GOLDEN_PATH = Path(__file__).parent / "data" / "golden.txt"


def _parse_value(text):
    if text in ("inf", "+inf"):
        return math.inf
    try:
        return int(text)
    except ValueError:
        return float(text)


def load_golden(path=GOLDEN_PATH):
    """Records ``(function_id, params, value, precision)`` from the golden table."""
    records = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fid, ptxt, value, prec = line.split()
        params = {}
        if ptxt != "-":
            for item in ptxt.split(","):
                key, val = item.split("=")
                params[key] = _parse_value(val)
        records.append((fid, params, float(value), float(prec)))
    return records


GOLDEN = load_golden()


def golden(fid, **params):
    """Unique golden value for ``fid`` whose parameters include ``params``."""
    hits = [r for r in GOLDEN if r[0] == fid and all(r[1].get(k) == v for k, v in params.items())]
    if len(hits) != 1:
        raise LookupError(f"{len(hits)} golden records for {fid} {params}")
    return hits[0][2]


def golden_records(fid):
    return [r for r in GOLDEN if r[0] == fid]


@pytest.fixture(scope="session")
def golden_table():
    return GOLDEN


ACCEPTANCE_LINES = []


def record_acceptance(label, passed, detail):
    """Log one PASS/FAIL line for the acceptance gate and return ``passed``."""
    line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
