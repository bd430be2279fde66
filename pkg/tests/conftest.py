"""Shared pytest wiring.

Tests marked with @pytest.mark.criterion("...") are release gates; the
terminal summary prints one PASS/FAIL line per gate so the outcome is
readable without scrolling through the full log.
"""

import pytest

_outcomes: dict = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): release-gate check, one summary line each"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call":
        _outcomes[name] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _outcomes[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("release gates")
    for name, outcome in _outcomes.items():
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
