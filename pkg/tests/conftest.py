"""Shared pytest hooks: one pass/fail summary line per acceptance criterion."""

from __future__ import annotations

import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    info = getattr(report, "criterion", None)
    if info is None:
        return
    number, title = info
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "detail": []})
    entry["ok"] &= report.passed
    entry["detail"].extend(v for k, v in report.user_properties if k == "detail")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = mark.args


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] else "FAIL"
        tr.write_line(f"criterion {number:>2} {status}  {e['title']}")
        for d in e["detail"]:
            tr.write_line(f"             {d}")


@pytest.fixture
def detail(record_property):
    """Attach a human-readable measurement to the acceptance summary."""
    def _add(text: str):
        record_property("detail", text)
    return _add
