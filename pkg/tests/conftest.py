import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=int(os.environ.get("HYPOTHESIS_MAX_EXAMPLES", "40")),
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def tridiag(n, lo=-1.0, mid=2.0, hi=-1.0):
    return (np.diag(np.full(n, mid)) + np.diag(np.full(n - 1, lo), -1)
            + np.diag(np.full(n - 1, hi), 1))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one PASS/FAIL line per acceptance criterion, printed after the run
_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion identifier")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    label = dict(report.user_properties).get("criterion")
    if label is not None:
        _CRITERIA.append((label, report.outcome, dict(report.user_properties).get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome, detail in _CRITERIA:
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"{status}  criterion {label}"
        terminalreporter.write_line(f"{line}  ({detail})" if detail else line)
