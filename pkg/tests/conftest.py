import time
from pathlib import Path

import pytest
from hypothesis import settings

from crisissim.model_state import Params, initial_state

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"
CALIBRATION = ROOT / "calibration" / "reference.cfg"


@pytest.fixture
def params():
    return Params()


@pytest.fixture
def state(params):
    return initial_state(params)


# One line per acceptance criterion, printed at the end of the run.
ACCEPTANCE: list[str] = []
SUITE_BUDGET_S = 60.0
_start = {}


def pytest_sessionstart(session):
    _start["t"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - _start.get("t", time.perf_counter())
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
        ok = elapsed < SUITE_BUDGET_S
        terminalreporter.write_line(
            f"{'PASS' if ok else 'FAIL'}  property suite runtime: {elapsed:.1f}s (budget {SUITE_BUDGET_S:.0f}s)")


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _start.get("t", time.perf_counter())
    if ACCEPTANCE and elapsed >= SUITE_BUDGET_S and exitstatus == 0:
        session.exitstatus = 1
