"""Shared fixtures plus the acceptance-summary hook.

Acceptance tests register one line each through the ``acceptance`` fixture;
the terminal summary prints them together so a run ends with a compact
pass/fail table for the headline checks.
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "sqglab",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("sqglab")

_ACCEPTANCE_LINES = []


class _AcceptanceLog:
    def record(self, name: str, passed: bool, detail: str) -> bool:
        tag = "PASS" if passed else "FAIL"
        _ACCEPTANCE_LINES.append(f"[{tag}] {name}: {detail}")
        return passed


@pytest.fixture
def acceptance():
    return _AcceptanceLog()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
