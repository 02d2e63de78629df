from __future__ import annotations

import re

import pytest

_LINES = pytest.StashKey[dict]()


def _criterion(text: str) -> int:
    return int(re.search(r"criterion_?\s*(\d+)", text).group(1))


def pytest_configure(config):
    config.stash[_LINES] = {}


@pytest.fixture
def acceptance(request):
    """``acceptance(ok, detail)`` records the pass/fail line of the running criterion."""
    lines = request.config.stash[_LINES]
    num = _criterion(request.node.name)
    lines.setdefault(num, f"[FAIL] criterion {num:>2}: did not complete ({request.node.name})")

    def record(ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {detail}"
        lines[num] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(lines):
        terminalreporter.write_line(lines[num])
