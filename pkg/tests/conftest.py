import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from onmcf.network import network_from_edges  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def parallel2():
    """Two unit-capacity parallel edges u -> v."""
    return network_from_edges("uv", [("u", "v", 1), ("u", "v", 1)])


@pytest.fixture
def single_edge():
    return network_from_edges("uv", [("u", "v", 1)])


@pytest.fixture
def diamond():
    return network_from_edges(
        ["u", "a", "b", "v"],
        [("u", "a", 1), ("a", "v", 1), ("u", "b", 1), ("b", "v", 1)],
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
