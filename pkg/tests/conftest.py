import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records one acceptance line and returns ``ok``."""

    def record(n, ok, detail):
        _CRITERIA[n] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
