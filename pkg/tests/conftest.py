import pytest

ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict; the summary prints them in order."""

    def record(key: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES[key] = f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: (int(k.rstrip("ab")), k)):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
