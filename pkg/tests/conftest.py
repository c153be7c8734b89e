import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sniffplace.graph_model import RoadGraph  # noqa: E402


def make_graph(edges, nodes=None):
    return RoadGraph.from_edges(edges, nodes)


@pytest.fixture
def p3():
    return make_graph([(1, 2), (2, 3)])


@pytest.fixture
def triangle():
    return make_graph([(1, 2), (2, 3), (1, 3)])


@pytest.fixture
def c4():
    return make_graph([(1, 2), (2, 3), (3, 4), (1, 4)])


@pytest.fixture
def k4():
    return make_graph([(a, b) for a in range(1, 5) for b in range(a + 1, 5)])


@pytest.fixture
def star4():
    return make_graph([(0, i) for i in range(1, 5)])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for name in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[name])
