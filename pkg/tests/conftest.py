"""Shared test plumbing.

The ``acceptance`` fixture hands tests a recorder; every recorded line is
printed in one block at the end of the pytest run, so the terminal output
closes with one PASS/FAIL line per end-to-end check.
"""

import pytest

_LINES: list[str] = []


@pytest.fixture
def acceptance():
    def record(num: int, ok: bool, detail: str) -> None:
        status = "PASS" if ok else "FAIL"
        _LINES.append(f"acceptance {num:02d} {status} - {detail}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _LINES:
        return
    terminalreporter.section("acceptance checks")
    for line in sorted(_LINES):
        terminalreporter.write_line(line)
