"""Shared test plumbing.

The acceptance tests register one result line per criterion; a terminal
summary hook prints them all at the end of the run so the pass/fail
status of every criterion is visible even without -s.
"""

import pytest

_CRITERION_LINES = []


def _record(num: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {detail}"
    _CRITERION_LINES.append((num, line))
    print(line)


@pytest.fixture
def criterion():
    """Record a criterion outcome, then assert it."""

    def check(num: int, ok: bool, detail: str):
        _record(num, bool(ok), detail)
        assert ok, f"criterion {num}: {detail}"

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERION_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERION_LINES):
        terminalreporter.write_line(line)
