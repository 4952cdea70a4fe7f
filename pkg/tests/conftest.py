import pytest

_LINES = {}


@pytest.fixture
def criterion():
    """Record one acceptance line; returns the verdict for the assert."""
    def record(number, passed, detail):
        _LINES[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(_LINES[number])
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_LINES):
            terminalreporter.write_line(_LINES[number])
