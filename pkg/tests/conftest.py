import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import corpus  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def two_route():
    return corpus.two_route()


@pytest.fixture
def instrument():
    return corpus.instrument()


@pytest.fixture
def seven():
    return corpus.seven()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
