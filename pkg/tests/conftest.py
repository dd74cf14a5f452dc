import pytest

_criterion_lines: list[str] = []


@pytest.fixture
def criterion_report():
    """Record one pass/fail line per acceptance criterion and assert it."""

    def report(num: int, ok: bool, detail: str) -> None:
        line = f"criterion {num:02d} {'PASS' if ok else 'FAIL'}: {detail}"
        _criterion_lines.append(line)
        print(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criterion_lines):
            terminalreporter.write_line(line)
