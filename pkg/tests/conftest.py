from __future__ import annotations

import pytest

_RESULTS: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict; printed in the terminal summary."""

    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        _RESULTS[number] = (title, passed, detail)
        line = f"ACCEPTANCE {number:2d} {'PASS' if passed else 'FAIL'}: {title}"
        print(line + (f" ({detail})" if detail else ""))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, passed, detail = _RESULTS[number]
        line = f"{number:2d} {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
