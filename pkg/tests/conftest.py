import pytest

ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def acceptance_line(request):
    """Record one PASS/FAIL line for the terminal summary (also printed)."""
    def record(number, name, passed, detail, seconds):
        line = f"{'PASS' if passed else 'FAIL'}  [{number:2d}] {name}: {detail} ({seconds:.1f} s)"
        request.config.stash[ACCEPTANCE].append((number, line))
        print(line)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
