import pytest

VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record one acceptance line; it is echoed now and repeated in the terminal summary."""

    def record(number, status, detail):
        line = f"criterion {number:>2}: {status:<12} {detail}"
        VERDICTS.append(line)
        print(line)
        return line

    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
