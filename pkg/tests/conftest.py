import pytest

CRITERIA = {}


@pytest.fixture
def record():
    """Store one pass/fail line per acceptance criterion."""

    def _record(number, name, ok, detail=""):
        CRITERIA[number] = (name, ok, detail)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        name, ok, detail = CRITERIA[number]
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        terminalreporter.write_line(f"{status} {number:>2} {name}: {detail}")
