from __future__ import annotations

import pytest
from hypothesis import settings

# fixed example streams: every property suite replays the same draws
settings.register_profile("fixed", derandomize=True, deadline=None)
settings.load_profile("fixed")

_CRITERIA: dict[int, str] = {}
_OUTCOMES: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n, title = marker.args
    _CRITERIA[n] = title
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _OUTCOMES.setdefault(n, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        results = _OUTCOMES.get(n, [])
        verdict = "PASS" if results and all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {_CRITERIA[n]}")
