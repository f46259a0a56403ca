"""Per-criterion summary for tests marked ``acceptance(criterion=..., title=...)``."""

from __future__ import annotations

import pytest

_RESULTS: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call" and not report.failed:
        return
    crit = marker.kwargs["criterion"]
    entry = _RESULTS.setdefault(crit, {"title": marker.kwargs.get("title", ""), "ok": True, "tests": 0})
    if report.when == "call":
        entry["tests"] += 1
    if report.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_RESULTS):
        e = _RESULTS[crit]
        mark = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {crit:2d}: {mark}  {e['title']} ({e['tests']} tests)")
