import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hybridkr import fixtures  # noqa: E402


@pytest.fixture
def story():
    return fixtures.load("ramnavami")


@pytest.fixture
def lecture():
    return fixtures.load("lecture")


@pytest.fixture
def restaurant():
    return fixtures.load("restaurant")


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(line)
