"""Shared pytest setup: the tests directory on sys.path and a per-criterion acceptance summary."""

import os
import re
import sys

sys.path.insert(0, os.path.dirname(__file__))

_CRITERION = re.compile(r"test_acceptance\.py::test_c(\d+)_")
_results: dict[int, list] = {}


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        details = [v for k, v in report.user_properties if k == "detail"]
        _results.setdefault(int(match.group(1)), []).append((report.passed, details))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        outcomes = _results[number]
        ok = all(passed for passed, _ in outcomes)
        detail = "; ".join(d for _, ds in outcomes for d in ds)
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
