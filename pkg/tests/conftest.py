from __future__ import annotations

import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Call ``criterion(n, ok, message)`` to print and record one acceptance verdict line."""

    def record(n: int, ok: bool, message: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {message}"
        print(line)
        _LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
