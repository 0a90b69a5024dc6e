import pytest

from leader_election.streams import block_rng

SEED = 1

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return block_rng(SEED, 0, "unit-tests")


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
