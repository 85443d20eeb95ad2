from __future__ import annotations

import pytest

from quasitree.cayley import build_ball
from quasitree.fixtures import get_fixture
from quasitree.groups import Group

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def free():
    return Group(get_fixture("free-product-c5-z"))


@pytest.fixture(scope="session")
def direct():
    return Group(get_fixture("direct-product-c5-z"))


@pytest.fixture(scope="session")
def free_ball6(free):
    return build_ball(free, 6)


@pytest.fixture(scope="session")
def direct_ball6(direct):
    return build_ball(direct, 6)
