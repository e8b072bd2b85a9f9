import pytest

_ACCEPTANCE: dict[tuple[int, str], tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Store a criterion verdict for the end-of-run acceptance table."""

    def _record(number: int, title: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE[(number, title)] = (bool(passed), detail)
        return bool(passed)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[(number, title)]
        tr.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}")
