import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ecbench.data import synthetic_households, synthetic_weather  # noqa: E402

# criterion number -> list of (ok, text); filled by test_acceptance.py
ACCEPTANCE: dict[int, list] = {}


def record_criterion(number: int, ok: bool, text: str) -> None:
    ACCEPTANCE.setdefault(number, []).append((bool(ok), text))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        rows = ACCEPTANCE[number]
        ok = all(r[0] for r in rows)
        tr.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}")
        for row_ok, text in rows:
            tr.write_line(f"    [{'pass' if row_ok else 'FAIL'}] {text}")


@pytest.fixture(scope="session")
def weather():
    return synthetic_weather("2012-07-01", "2014-03-01", seed=0)


@pytest.fixture(scope="session")
def pool(weather):
    return synthetic_households(40, weather, seed=1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
