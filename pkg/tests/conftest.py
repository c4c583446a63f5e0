import pytest

_VERDICTS = {}


class CriterionLog:
    """Records one verdict line per acceptance criterion; the line is kept even
    when the assertion that follows fails."""

    def check(self, num, title, ok, detail=""):
        _VERDICTS[num] = f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {title}" + (f" ({detail})" if detail else "")
        print(_VERDICTS[num])
        assert ok, _VERDICTS[num]


@pytest.fixture(scope="session")
def criterion():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for num in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[num])
