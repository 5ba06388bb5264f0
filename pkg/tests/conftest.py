import pytest

_ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def report():
    """Record one check towards a numbered acceptance criterion."""
    def _report(criterion: int, ok: bool, detail: str) -> None:
        _ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))
    return _report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        checks = _ACCEPTANCE[n]
        status = "PASS" if all(ok for ok, _ in checks) else "FAIL"
        details = "; ".join(d for _, d in checks)
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {details}")
