import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Store one pass/fail line for the acceptance summary."""

    def _record(criterion, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {criterion}" + (f": {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
