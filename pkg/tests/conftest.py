from datetime import datetime, timezone

import numpy as np
import pytest

from co2forecast.series import HourlySeries

START = datetime(2019, 1, 1, tzinfo=timezone.utc)


def synthetic(n, seed=0, noise=0.05, amplitude=1.0, slope=0.01):
    """sin(2 pi t / 24) * amplitude + slope t + N(0, noise * amplitude)."""
    t = np.arange(n)
    rng = np.random.default_rng(seed)
    return amplitude * np.sin(2 * np.pi * t / 24) + slope * t + rng.normal(0, noise * amplitude, n)


@pytest.fixture
def start():
    return START


@pytest.fixture
def hourly():
    def make(values, start=START):
        return HourlySeries(start, np.asarray(values, dtype=float))
    return make


ACCEPTANCE_LINES = []


def record_criterion(name, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] {name}" + (f" -- {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
