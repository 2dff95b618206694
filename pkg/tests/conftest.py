from pathlib import Path

import pytest

from phylomoves.group import parse_group
from phylomoves.tables import Table

import acceptance_log

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def z2():
    return parse_group("Z2")


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def ex23(z2):
    """The two compatible tables of the worked example and the intermediate table."""
    t0 = Table.from_entries(z2, [[1, 1, 1, 1, 1, 1], [0, 0, 0, 0, 0, 0], [1, 1, 0, 0, 0, 0]])
    t1 = Table.from_entries(z2, [[0, 1, 0, 1, 0, 0], [1, 0, 1, 0, 0, 0], [1, 1, 0, 0, 1, 1]])
    mid = Table.from_entries(z2, [[0, 1, 0, 1, 0, 0], [1, 0, 1, 0, 1, 1], [1, 1, 0, 0, 0, 0]])
    return t0, mid, t1


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
