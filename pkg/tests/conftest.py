"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import time

import pytest

_results: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    start = time.perf_counter()
    yield
    item._elapsed = time.perf_counter() - start


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title, limit = marker.args
    entry = _results.setdefault(number, {"title": title, "limit": limit, "elapsed": 0.0, "failed": []})
    entry["elapsed"] += getattr(item, "_elapsed", report.duration)
    if not report.passed:
        entry["failed"].append(item.callspec.id if hasattr(item, "callspec") else item.name)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        e = _results[number]
        over = e["elapsed"] > e["limit"]
        ok = not e["failed"] and not over
        notes = []
        if e["failed"]:
            notes.append("failed: " + ", ".join(e["failed"]))
        if over:
            notes.append(f"over the {e['limit']}s limit")
        suffix = f" [{'; '.join(notes)}]" if notes else ""
        terminalreporter.write_line(
            f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {e['title']} ({e['elapsed']:.1f}s / {e['limit']}s){suffix}"
        )
