import re

import pytest

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    key = int(m.group(1))
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        prev = _ACCEPTANCE.get(key, True)
        _ACCEPTANCE[key] = prev and not failed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    from test_acceptance import TITLES

    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        status = "PASS" if _ACCEPTANCE[key] else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {key}: {TITLES.get(key, '')}")
