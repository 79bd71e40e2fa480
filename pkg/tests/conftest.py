from __future__ import annotations

import pytest

from antisym.experiments import ExperimentConfig, run

_ACCEPTANCE: dict[str, dict] = {}


@pytest.fixture(scope="session")
def approx_error_rows():
    """Default convergence run: n = 8, ReLU, t = 0.1, 100 samples, both node-count variants."""
    return run(ExperimentConfig("approx_error", record_timing=False))


@pytest.fixture(scope="session")
def fig1_analytic_rows():
    """Norm decay for n in [6, 12] from the frequency integral (closed form for exp), 20 draws."""
    return run(ExperimentConfig("fig1", n_range=(6, 12), brute_n_max=5, seeds=20, record_timing=False))


@pytest.fixture(scope="session")
def depth_rows():
    return run(ExperimentConfig("depth", record_timing=False))


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        props = dict(report.user_properties)
        if "criterion" in props:
            _ACCEPTANCE[report.nodeid] = {"outcome": report.outcome, **props}


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for entry in sorted(_ACCEPTANCE.values(), key=lambda e: e["criterion"]):
        status = "PASS" if entry["outcome"] == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {entry['criterion']:>2}: {entry['title']} | {entry.get('measured', '')}")
